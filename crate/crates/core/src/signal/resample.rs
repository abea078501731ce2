//! Band-limited resampling by windowed-sinc interpolation.
//!
//! Each output sample is a Blackman-windowed sinc sum over the input, with the
//! cutoff placed below the lower of the two Nyquist frequencies so that
//! decimation is anti-aliased. The kernel weights are renormalized to sum to
//! one at every output position; near the record edges this keeps DC gain
//! exact where the kernel is truncated.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{round_half_up, EventMarker, Recording};
use crate::error::bail;
use crate::Result;

/// Cutoff as a fraction of the lower Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.9;
/// Kernel half-width in zero crossings of the cutoff sinc.
const HALF_ZEROS: f64 = 16.0;

/// `round(n * target / fs)` with ties rounded up.
pub fn resampled_len(n_samples: usize, fs: f64, target_fs: f64) -> usize {
    round_half_up(n_samples as f64 * target_fs / fs).max(0) as usize
}

pub fn resample(rec: &Recording, target_fs: f64) -> Result<Recording> {
    if !(target_fs.is_finite() && target_fs > 0.0) {
        bail!(Argument, "target rate must be positive, got {target_fs}");
    }
    let fs = rec.fs();
    let n_in = rec.n_samples();
    let n_out = resampled_len(n_in, fs, target_fs);
    let events: Vec<EventMarker> = rec
        .events()
        .iter()
        .map(|e| EventMarker {
            sample_index: (round_half_up(e.sample_index as f64 * target_fs / fs).max(0) as usize)
                .min(n_out.saturating_sub(1)),
            label: e.label.clone(),
        })
        .collect();
    let data = if (target_fs - fs).abs() < 1e-12 * fs {
        rec.data().to_vec()
    } else {
        let kernel = Kernel::new(fs, target_fs);
        rec.data()
            .iter()
            .map(|row| kernel.apply(row, n_out))
            .collect()
    };
    let mut out = rec.with_data(data);
    out.fs = target_fs;
    out.events = events;
    Ok(out)
}

struct Kernel {
    /// Input samples per output sample.
    step: f64,
    /// Normalized cutoff, in cycles per input sample times two.
    band: f64,
    half_width: f64,
}

impl Kernel {
    fn new(fs: f64, target_fs: f64) -> Self {
        let band = CUTOFF_FRACTION * (target_fs / fs).min(1.0);
        Self {
            step: fs / target_fs,
            band,
            half_width: HALF_ZEROS / band,
        }
    }

    fn weight(&self, offset: f64) -> f64 {
        let u = offset / self.half_width;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let arg = PI * self.band * offset;
        let sinc = if arg.abs() < 1e-12 {
            1.0
        } else {
            libm::sin(arg) / arg
        };
        let window = 0.42 + 0.5 * libm::cos(PI * u) + 0.08 * libm::cos(2.0 * PI * u);
        sinc * window
    }

    fn apply(&self, x: &[f64], n_out: usize) -> Vec<f64> {
        let n = x.len() as i64;
        (0..n_out)
            .map(|j| {
                let t = j as f64 * self.step;
                let lo = (libm::ceil(t - self.half_width) as i64).max(0);
                let hi = (libm::floor(t + self.half_width) as i64).min(n - 1);
                let mut acc = 0.0;
                let mut norm = 0.0;
                for k in lo..=hi {
                    let w = self.weight(t - k as f64);
                    acc += w * x[k as usize];
                    norm += w;
                }
                if norm.abs() > 1e-12 {
                    acc / norm
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tone_rec(freq: f64, fs: f64, seconds: f64) -> Recording {
        let n = (fs * seconds) as usize;
        let x = (0..n)
            .map(|i| libm::sin(2.0 * PI * freq * i as f64 / fs))
            .collect();
        let ev = vec![EventMarker {
            sample_index: n / 2,
            label: "a".to_string(),
        }];
        Recording::new(vec![x], fs, vec!["Cz".to_string()], ev, "s").unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
    }

    #[test]
    fn length_and_event_rescaling() {
        let r = tone_rec(10.0, 500.0, 5.0);
        let out = resample(&r, 200.0).unwrap();
        assert_eq!(out.n_samples(), 1000);
        assert_eq!(out.fs(), 200.0);
        assert_eq!(out.events()[0].sample_index, 500);
    }

    #[test]
    fn upsampling_preserves_tone() {
        let r = tone_rec(10.0, 100.0, 5.0);
        let out = resample(&r, 200.0).unwrap();
        assert_eq!(out.n_samples(), 1000);
        assert!((rms(out.channel(0)) / rms(r.channel(0)) - 1.0).abs() < 0.02);
        // interior samples match the analytic tone
        for j in 100..900 {
            let want = libm::sin(2.0 * PI * 10.0 * j as f64 / 200.0);
            assert!((out.channel(0)[j] - want).abs() < 1e-3, "sample {j}");
        }
    }

    #[test]
    fn downsampling_suppresses_aliases() {
        // 180 Hz at 500 Hz would alias to 20 Hz at 200 Hz.
        let r = tone_rec(180.0, 500.0, 4.0);
        let out = resample(&r, 200.0).unwrap();
        let interior = &out.channel(0)[50..750];
        assert!(rms(interior) < 1e-2);
    }

    #[test]
    fn rejects_nonpositive_rate() {
        let r = tone_rec(10.0, 100.0, 1.0);
        assert!(resample(&r, 0.0).is_err());
        assert!(resample(&r, -5.0).is_err());
    }

    #[test]
    fn half_ties_round_up() {
        // 3 samples at 4 Hz to 2 Hz is 1.5 samples
        assert_eq!(resampled_len(3, 4.0, 2.0), 2);
        assert_eq!(resampled_len(2500, 500.0, 200.0), 1000);
    }
}
