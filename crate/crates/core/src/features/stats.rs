//! Per-channel time-domain statistics, temporal pyramid, peaks and Hjorth
//! parameters.

use alloc::vec::Vec;

use crate::error::bail;
use crate::Result;

/// Below this standard deviation, shape statistics and Hjorth ratios are 0.
pub const STD_EPS: f64 = 1e-12;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Quantile with linear interpolation between order statistics of a sorted
/// slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    sorted[lo] + t * (sorted[hi] - sorted[lo])
}

/// `[mean, median, min, max, skewness, excess kurtosis, rms, iqr, std, variance]`
/// with population moments.
pub fn time_domain_stats(x: &[f64]) -> Result<[f64; 10]> {
    if x.len() < 2 {
        return Err(crate::Error::Length {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let std = libm::sqrt(m2);
    let (skew, kurt) = if std > STD_EPS {
        (m3 / (m2 * std), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rms = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / n);
    Ok([
        m,
        quantile_sorted(&sorted, 0.5),
        sorted[0],
        sorted[sorted.len() - 1],
        skew,
        kurt,
        rms,
        quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        std,
        m2,
    ])
}

/// Segment counts per pyramid level; 15 segments in total so the pooled
/// output is always 75 values.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PyramidSpec {
    pub level_segments: Vec<usize>,
}

pub const PYRAMID_SEGMENTS: usize = 15;
pub const SEGMENT_STATS: usize = 5;

impl Default for PyramidSpec {
    fn default() -> Self {
        Self {
            level_segments: alloc::vec![1, 2, 4, 8],
        }
    }
}

impl PyramidSpec {
    pub fn validate(&self) -> Result<()> {
        if self.level_segments.contains(&0) {
            bail!(Argument, "pyramid levels need at least one segment");
        }
        let total: usize = self.level_segments.iter().sum();
        if total != PYRAMID_SEGMENTS {
            bail!(
                Argument,
                "pyramid segments must total {PYRAMID_SEGMENTS}, got {total}"
            );
        }
        Ok(())
    }

    pub fn max_segments(&self) -> usize {
        self.level_segments.iter().copied().max().unwrap_or(1)
    }
}

/// Contiguous near-equal partition of `len` into `k` parts; the first
/// `len % k` parts are one sample longer.
pub fn partition(len: usize, k: usize) -> impl Iterator<Item = core::ops::Range<usize>> {
    let (base, extra) = (len / k, len % k);
    let mut start = 0;
    (0..k).map(move |i| {
        let size = base + usize::from(i < extra);
        let r = start..start + size;
        start += size;
        r
    })
}

/// `[mean, std, rms, line length, peak-to-peak]` of every segment, level by
/// level.
pub fn pyramid_pool(x: &[f64], spec: &PyramidSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if x.len() < spec.max_segments() {
        return Err(crate::Error::Length {
            needed: spec.max_segments(),
            got: x.len(),
        });
    }
    let mut out = Vec::with_capacity(PYRAMID_SEGMENTS * SEGMENT_STATS);
    for &k in &spec.level_segments {
        for r in partition(x.len(), k) {
            let s = &x[r];
            let line: f64 = s.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            let (lo, hi) = s
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            out.extend_from_slice(&[
                mean(s),
                libm::sqrt(variance(s)),
                libm::sqrt(s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64),
                line,
                hi - lo,
            ]);
        }
    }
    Ok(out)
}

/// `[max, argmax / len, min, argmin / len]`, first occurrence on ties.
pub fn peak_features(x: &[f64]) -> Result<[f64; 4]> {
    if x.is_empty() {
        return Err(crate::Error::Length { needed: 1, got: 0 });
    }
    let (mut imax, mut imin) = (0, 0);
    for (i, &v) in x.iter().enumerate() {
        if v > x[imax] {
            imax = i;
        }
        if v < x[imin] {
            imin = i;
        }
    }
    let n = x.len() as f64;
    Ok([x[imax], imax as f64 / n, x[imin], imin as f64 / n])
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `[activity, mobility, complexity]`.
pub fn hjorth_params(x: &[f64]) -> Result<[f64; 3]> {
    if x.len() < 3 {
        return Err(crate::Error::Length {
            needed: 3,
            got: x.len(),
        });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Ok([0.0; 3]);
    }
    let dx = diff(x);
    let ddx = diff(&dx);
    let (v0, v1, v2) = (variance(x), variance(&dx), variance(&ddx));
    let mobility = |num: f64, den: f64| {
        if den > STD_EPS * STD_EPS {
            libm::sqrt(num / den)
        } else {
            0.0
        }
    };
    let mob_x = mobility(v1, v0);
    let mob_dx = mobility(v2, v1);
    let complexity = if mob_x > STD_EPS { mob_dx / mob_x } else { 0.0 };
    Ok([v0, mob_x, complexity])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn worked_stats_example() {
        let s = time_domain_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(&s[..4], &[2.5, 2.5, 1.0, 4.0]);
        assert!((s[8] - libm::sqrt(1.25)).abs() < 1e-12);
        assert!((s[6] - libm::sqrt(7.5)).abs() < 1e-12);
        assert!((s[7] - 1.5).abs() < 1e-12);
        assert!((s[9] - 1.25).abs() < 1e-12);
        assert!(s[4].abs() < 1e-12);
        // uniform on four points: m4 / m2^2 = 2.5625 / 1.5625
        assert!((s[5] - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_and_short_inputs() {
        let s = time_domain_stats(&[3.0; 9]).unwrap();
        assert_eq!([s[4], s[5], s[7], s[8]], [0.0; 4]);
        assert!(time_domain_stats(&[1.0]).is_err());
        assert_eq!(hjorth_params(&[2.0; 50]).unwrap(), [0.0; 3]);
        assert!(hjorth_params(&[1.0, 2.0]).is_err());
        assert!(peak_features(&[]).is_err());
    }

    #[test]
    fn symmetric_input_has_no_skew() {
        let x: Vec<f64> = (-20..=20).map(|i| libm::pow(i as f64, 3.0)).collect();
        assert!(time_domain_stats(&x).unwrap()[4].abs() < 1e-9);
    }

    #[test]
    fn pyramid_on_ramp() {
        let ramp: Vec<f64> = (0..16).map(f64::from).collect();
        let p = pyramid_pool(&ramp, &PyramidSpec::default()).unwrap();
        assert_eq!(p.len(), 75);
        assert_eq!(p[0], 7.5);
        assert_eq!(p[3], 15.0);
        assert_eq!(p[5], 3.5);
        assert_eq!(p[10], 11.5);
        assert!(pyramid_pool(&ramp[..7], &PyramidSpec::default()).is_err());
        assert!(PyramidSpec {
            level_segments: vec![1, 2, 4]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn partition_lengths() {
        let sizes: Vec<usize> = partition(10, 4).map(|r| r.len()).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
    }

    #[test]
    fn peaks() {
        let mut x = vec![0.0; 200];
        x[40] = 5.0;
        assert_eq!(peak_features(&x).unwrap()[..2], [5.0, 0.2]);
        let sine: Vec<f64> = (0..200)
            .map(|i| libm::sin(2.0 * PI * i as f64 / 200.0))
            .collect();
        let p = peak_features(&sine).unwrap();
        assert!((p[1] - 0.25).abs() <= 1.0 / 200.0 && (p[3] - 0.75).abs() <= 1.0 / 200.0);
        let neg = peak_features(&[-3.0, -1.0, -2.0]).unwrap();
        assert_eq!(neg, [-1.0, 1.0 / 3.0, -3.0, 0.0]);
    }

    #[test]
    fn hjorth_sine() {
        let x: Vec<f64> = (0..2000)
            .map(|i| libm::sin(2.0 * PI * 10.0 * i as f64 / 200.0))
            .collect();
        let h = hjorth_params(&x).unwrap();
        let expect = 2.0 * libm::sin(PI * 10.0 / 200.0);
        assert!((h[1] / expect - 1.0).abs() < 0.01);
        assert!((h[2] - 1.0).abs() < 0.02);
    }

    #[test]
    fn hjorth_constant_is_exactly_zero() {
        assert_eq!(hjorth_params(&[4.2; 200]).unwrap(), [0.0; 3]);
    }
}
