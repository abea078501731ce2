//! Synthetic ERP datasets with a controllable class effect.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::fft::{Complex64, FftPlan};
use crate::signal::{zscore_trials, TrialSet};
use crate::Result;

/// What distinguishes class 1 from class 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassEffect {
    None,
    /// Sinusoid of random phase added to every class-1 trial.
    BandPower {
        freq_hz: f64,
        amplitude_uv: f64,
    },
    /// Gaussian bump added after stimulus onset in class-1 trials.
    EvokedPeak {
        amplitude_uv: f64,
        latency_s: f64,
        width_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub name: String,
    pub n_subjects: usize,
    pub trials_per_subject: usize,
    pub n_channels: usize,
    pub fs: f64,
    /// Window relative to stimulus onset, seconds.
    pub window: (f64, f64),
    /// Pre-stimulus interval subtracted per channel, seconds.
    pub baseline: (f64, f64),
    /// RMS of the background noise.
    pub noise_uv: f64,
    /// Per-subject gain is drawn from `1 ± subject_jitter`.
    pub subject_jitter: f64,
    pub effect: ClassEffect,
    /// Z-score each trial channel after baseline correction.
    pub zscore: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            name: String::from("synthetic"),
            n_subjects: 30,
            trials_per_subject: 60,
            n_channels: 8,
            fs: 200.0,
            window: (-0.2, 0.8),
            baseline: (-0.2, 0.0),
            noise_uv: 10.0,
            subject_jitter: 0.3,
            effect: ClassEffect::BandPower {
                freq_hz: 10.0,
                amplitude_uv: 6.0,
            },
            zscore: true,
        }
    }
}

impl SynthSpec {
    pub fn n_samples(&self) -> usize {
        crate::signal::round_half_up((self.window.1 - self.window.0) * self.fs).max(0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects < 5 || self.trials_per_subject < 10 || self.n_channels == 0 {
            bail!(
                Argument,
                "need at least 5 subjects, 10 trials per subject and one channel"
            );
        }
        if !(self.fs.is_finite() && self.fs > 0.0) || self.n_samples() < 16 {
            bail!(
                Argument,
                "sampling rate and window must give at least 16 samples"
            );
        }
        let (b0, b1) = self.baseline;
        if !(b0 >= self.window.0 && b0 < b1 && b1 <= self.window.1) {
            bail!(Argument, "baseline must lie inside the window");
        }
        if !(self.noise_uv > 0.0) || !(0.0..1.0).contains(&self.subject_jitter) {
            bail!(Argument, "noise must be positive and jitter in [0, 1)");
        }
        match self.effect {
            ClassEffect::None => {}
            ClassEffect::BandPower {
                freq_hz,
                amplitude_uv,
            } => {
                if !(freq_hz > 0.0 && freq_hz < self.fs / 2.0) || !amplitude_uv.is_finite() {
                    bail!(Argument, "band effect frequency must lie below Nyquist");
                }
            }
            ClassEffect::EvokedPeak {
                amplitude_uv,
                latency_s,
                width_s,
            } => {
                if !(width_s > 0.0)
                    || !amplitude_uv.is_finite()
                    || !(latency_s > 0.0 && latency_s < self.window.1)
                {
                    bail!(
                        Argument,
                        "evoked peak must have positive width and fall inside the window"
                    );
                }
            }
        }
        Ok(())
    }
}

/// Unit-RMS noise with a 1/f power spectrum.
fn pink_noise(rng: &mut crate::rng::Rng, plan: &FftPlan, buf: &mut [Complex64]) -> Vec<f64> {
    let n = buf.len();
    for b in buf.iter_mut() {
        *b = Complex64::new(StandardNormal.sample(rng), 0.0);
    }
    plan.forward(buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for k in 1..n {
        let f = k.min(n - k) as f64;
        buf[k] /= libm::sqrt(f);
    }
    plan.inverse(buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / n as f64);
    x.into_iter().map(|v| v / rms.max(1e-300)).collect()
}

/// Balanced binary trials per subject with the planted effect, baseline
/// corrected and optionally z-scored.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<TrialSet> {
    spec.validate()?;
    let (c, n) = (spec.n_channels, spec.n_samples());
    let plan = FftPlan::new(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let (b0, b1) = spec.baseline;
    let bl0 = crate::signal::round_half_up((b0 - spec.window.0) * spec.fs).max(0) as usize;
    let bl1 = (crate::signal::round_half_up((b1 - spec.window.0) * spec.fs).max(0) as usize)
        .clamp(bl0 + 1, n);
    let times: Vec<f64> = (0..n).map(|i| spec.window.0 + i as f64 / spec.fs).collect();

    let total = spec.n_subjects * spec.trials_per_subject;
    let mut data = Vec::with_capacity(total * c * n);
    let mut labels = Vec::with_capacity(total);
    let mut subject_ids = Vec::with_capacity(total);
    for s in 0..spec.n_subjects {
        let subject = format!("sub-{s:03}");
        let mut rng = crate::rng::stream(seed, &["synth", &subject]);
        let gain = 1.0 + rng.random_range(-spec.subject_jitter..=spec.subject_jitter);
        let mut classes: Vec<usize> = (0..spec.trials_per_subject).map(|t| t % 2).collect();
        classes.shuffle(&mut rng);
        for class in classes {
            let phase = rng.random_range(0.0..2.0 * PI);
            for _ in 0..c {
                let mut x = pink_noise(&mut rng, &plan, &mut buf);
                for (v, t) in x.iter_mut().zip(&times) {
                    *v *= spec.noise_uv;
                    if class == 1 {
                        *v += match spec.effect {
                            ClassEffect::None => 0.0,
                            ClassEffect::BandPower {
                                freq_hz,
                                amplitude_uv,
                            } => amplitude_uv * libm::sin(2.0 * PI * freq_hz * t + phase),
                            ClassEffect::EvokedPeak {
                                amplitude_uv,
                                latency_s,
                                width_s,
                            } => {
                                let z = (t - latency_s) / width_s;
                                amplitude_uv * libm::exp(-0.5 * z * z)
                            }
                        };
                    }
                    *v *= gain;
                }
                let base = x[bl0..bl1].iter().sum::<f64>() / (bl1 - bl0) as f64;
                data.extend(x.into_iter().map(|v| v - base));
            }
            labels.push(class);
            subject_ids.push(subject.clone());
        }
    }
    let ts = TrialSet::new(
        data,
        c,
        n,
        labels,
        subject_ids,
        spec.fs,
        vec![String::from("class0"), String::from("class1")],
        (0..c).map(|i| format!("Ch{}", i + 1)).collect(),
    )?;
    if spec.zscore {
        zscore_trials(&ts)
    } else {
        Ok(ts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            n_subjects: 6,
            trials_per_subject: 10,
            n_channels: 2,
            ..Default::default()
        }
    }

    #[test]
    fn shape_and_determinism() {
        let a = synth_dataset(&small(), 7).unwrap();
        assert_eq!((a.n_trials(), a.n_channels(), a.n_samples()), (60, 2, 200));
        assert_eq!(a.labels().iter().filter(|&&l| l == 1).count(), 30);
        assert_eq!(a, synth_dataset(&small(), 7).unwrap());
        assert_ne!(a, synth_dataset(&small(), 8).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(synth_dataset(
            &SynthSpec {
                n_subjects: 4,
                ..small()
            },
            0
        )
        .is_err());
        assert!(synth_dataset(
            &SynthSpec {
                trials_per_subject: 9,
                ..small()
            },
            0
        )
        .is_err());
        let bad = SynthSpec {
            effect: ClassEffect::BandPower {
                freq_hz: 150.0,
                amplitude_uv: 1.0,
            },
            ..small()
        };
        assert!(synth_dataset(&bad, 0).is_err());
    }

    #[test]
    fn noise_spectrum_falls_with_frequency() {
        let plan = FftPlan::new(1024);
        let mut buf = vec![Complex64::new(0.0, 0.0); 1024];
        let mut rng = crate::rng::stream(1, &["pink"]);
        let (mut low, mut high) = (0.0, 0.0);
        for _ in 0..20 {
            let x = pink_noise(&mut rng, &plan, &mut buf);
            let spec = crate::fft::real_forward(&plan, &x);
            low += spec[4..16].iter().map(|c| c.norm_sqr()).sum::<f64>() / 12.0;
            high += spec[256..268].iter().map(|c| c.norm_sqr()).sum::<f64>() / 12.0;
        }
        // 1/f: bins ~10 vs ~262 differ by roughly 26x
        assert!(low / high > 10.0);
    }
}
