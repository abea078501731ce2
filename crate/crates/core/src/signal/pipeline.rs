//! The full continuous-to-trials chain.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{
    amplitude_reject, average_reref, bandpass_filter, epoch_and_baseline, interpolate_channels,
    notch_filter, resample, zscore_trials, EpochSpec, LabelMap, Recording, TrialSet,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSpec {
    /// Line-noise frequency; `None` skips the notch.
    pub notch_hz: Option<f64>,
    pub band: (f64, f64),
    pub target_fs: f64,
    pub epoch: EpochSpec,
    /// Peak-to-peak rejection threshold in µV, applied before z-scoring.
    pub ptp_reject_uv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessOutcome {
    pub trials: TrialSet,
    pub boundary_skips: usize,
    pub unmapped: usize,
    pub rejected: usize,
}

/// Notch, band-pass, bad-channel interpolation, average reference,
/// resampling, epoching with baseline correction, optional rejection and
/// per-trial z-scoring. Non-EEG channels must already be removed
/// ([`Recording::select_channels`]).
pub fn preprocess(
    rec: &Recording,
    bad_channels: &[usize],
    spec: &PreprocessSpec,
    labels: &LabelMap,
) -> Result<PreprocessOutcome> {
    spec.epoch.validate()?;
    let mut r = match spec.notch_hz {
        Some(hz) => notch_filter(rec, hz)?,
        None => rec.clone(),
    };
    r = bandpass_filter(&r, spec.band.0, spec.band.1)?;
    if !bad_channels.is_empty() {
        r = interpolate_channels(&r, bad_channels)?;
    }
    if r.n_channels() > 1 {
        r = average_reref(&r)?;
    }
    if r.fs() != spec.target_fs {
        r = resample(&r, spec.target_fs)?;
    }
    let out = epoch_and_baseline(&r, &spec.epoch, labels)?;
    let (trials, rejected) = match spec.ptp_reject_uv {
        Some(t) => amplitude_reject(&out.trials, t)?,
        None => (out.trials, 0),
    };
    Ok(PreprocessOutcome {
        trials: zscore_trials(&trials)?,
        boundary_skips: out.boundary_skips,
        unmapped: out.unmapped,
        rejected,
    })
}

/// Channel indices whose labels are not in `non_eeg` (case-insensitive).
pub fn eeg_channel_mask<S: AsRef<str>>(labels: &[S], non_eeg: &[S]) -> Vec<bool> {
    labels
        .iter()
        .map(|l| {
            !non_eeg
                .iter()
                .any(|n| n.as_ref().eq_ignore_ascii_case(l.as_ref()))
        })
        .collect()
}
