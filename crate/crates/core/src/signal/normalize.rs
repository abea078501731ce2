use alloc::vec::Vec;

use super::TrialSet;
use crate::error::bail;
use crate::Result;

/// Standard deviations below this are treated as zero.
pub const ZSCORE_EPS: f64 = 1e-12;

/// Per (trial, channel) row: zero mean, unit population standard deviation.
/// Constant rows become all zeros.
pub fn zscore_trials(ts: &TrialSet) -> Result<TrialSet> {
    if ts.data().iter().any(|v| !v.is_finite()) {
        bail!(Data, "trials contain non-finite values");
    }
    if ts.is_empty() || ts.n_samples() == 0 {
        return Ok(ts.clone());
    }
    let mut out = Vec::with_capacity(ts.data().len());
    for row in ts.rows() {
        let n = row.len() as f64;
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        if std < ZSCORE_EPS {
            out.extend(core::iter::repeat_n(0.0, row.len()));
        } else {
            out.extend(row.iter().map(|v| (v - mean) / std));
        }
    }
    Ok(ts.with_data(out))
}

/// Drops trials whose peak-to-peak amplitude on any channel exceeds
/// `ptp_threshold_uv`. Returns the kept trials and the number dropped.
///
/// Must run on microvolt data, before [`zscore_trials`].
pub fn amplitude_reject(ts: &TrialSet, ptp_threshold_uv: f64) -> Result<(TrialSet, usize)> {
    if !(ptp_threshold_uv.is_finite() && ptp_threshold_uv > 0.0) {
        bail!(
            Argument,
            "peak-to-peak threshold must be positive, got {ptp_threshold_uv}"
        );
    }
    let c = ts.n_channels();
    let keep: Vec<bool> = (0..ts.n_trials())
        .map(|t| {
            (0..c).all(|ch| {
                let row = ts.row(t, ch);
                let (lo, hi) = row
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                row.is_empty() || hi - lo <= ptp_threshold_uv
            })
        })
        .collect();
    let rejected = keep.iter().filter(|k| !**k).count();
    Ok((ts.filter(|t| keep[t]), rejected))
}
