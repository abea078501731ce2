//! Butterworth band-pass and notch filters applied with zero phase.
//!
//! Filters are designed as cascades of second-order sections via the bilinear
//! transform. They are applied as the squared-magnitude response `|H|^2`
//! (the steady-state effect of one forward and one backward pass) on the
//! half-sample symmetric extension `x[0..n] ++ reverse(x)`, evaluated on the
//! DFT grid of that extension. Two consequences:
//!
//! * no start-up transients, because the extended signal is continuous and
//!   periodic;
//! * each filter is a linear operator diagonal in the same basis, so any two
//!   filters commute up to rounding.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::Recording;
use crate::error::bail;
use crate::fft::{Complex64, FftPlan};
use crate::Result;

/// Order of each Butterworth edge of the band-pass.
pub const BANDPASS_ORDER: usize = 4;
/// Quality factor of the line-noise notch.
pub const NOTCH_Q: f64 = 30.0;

/// Second-order section, `a[0]` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Complex response at normalized angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = Complex64::new(self.b[0], 0.0) + z1 * self.b[1] + z2 * self.b[2];
        let den = Complex64::new(1.0, 0.0) + z1 * self.a[1] + z2 * self.a[2];
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    /// `|H(e^{jw})|^2` of the cascade.
    pub fn power_response(&self, w: f64) -> f64 {
        self.sections
            .iter()
            .map(|s| s.response(w).norm_sqr())
            .product()
    }

    pub fn then(mut self, other: SosFilter) -> Self {
        self.sections.extend(other.sections);
        self
    }
}

fn butterworth_sections(order: usize, cutoff_hz: f64, fs: f64, highpass: bool) -> SosFilter {
    assert!(
        order >= 2 && order.is_multiple_of(2),
        "order must be even and at least 2"
    );
    let k = libm::tan(PI * cutoff_hz / fs);
    let sections = (1..=order / 2)
        .map(|i| {
            let theta = PI * (2 * i - 1) as f64 / (2 * order) as f64;
            let q = 1.0 / (2.0 * libm::sin(theta));
            let norm = 1.0 / (1.0 + k / q + k * k);
            let b0 = if highpass { norm } else { k * k * norm };
            let b1 = if highpass { -2.0 * b0 } else { 2.0 * b0 };
            Biquad {
                b: [b0, b1, b0],
                a: [
                    1.0,
                    2.0 * (k * k - 1.0) * norm,
                    (1.0 - k / q + k * k) * norm,
                ],
            }
        })
        .collect();
    SosFilter { sections }
}

/// Even-order digital Butterworth low-pass (bilinear transform, prewarped).
pub fn butterworth_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> SosFilter {
    butterworth_sections(order, cutoff_hz, fs, false)
}

/// Even-order digital Butterworth high-pass (bilinear transform, prewarped).
pub fn butterworth_highpass(order: usize, cutoff_hz: f64, fs: f64) -> SosFilter {
    butterworth_sections(order, cutoff_hz, fs, true)
}

/// Second-order IIR notch with -3 dB bandwidth `notch_hz / q`.
pub fn notch_design(notch_hz: f64, q: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * PI * notch_hz / fs;
    let bw = w0 / q;
    let gain = 1.0 / (1.0 + libm::tan(bw / 2.0));
    let c = libm::cos(w0);
    Biquad {
        b: [gain, -2.0 * gain * c, gain],
        a: [1.0, -2.0 * gain * c, 2.0 * gain - 1.0],
    }
}

/// Zero-phase application of `filter` to one channel (see module docs).
pub fn apply_zero_phase(x: &[f64], filter: &SosFilter) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let plan = FftPlan::new(2 * x.len());
    let gains = symmetric_gains(filter, 2 * x.len());
    apply_with(&plan, &gains, x)
}

fn symmetric_gains(filter: &SosFilter, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let k = k.min(len - k);
            filter.power_response(2.0 * PI * k as f64 / len as f64)
        })
        .collect()
}

fn apply_with(plan: &FftPlan, gains: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x
        .iter()
        .chain(x.iter().rev())
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    plan.forward(&mut buf);
    for (v, g) in buf.iter_mut().zip(gains) {
        *v *= *g;
    }
    plan.inverse(&mut buf);
    buf[..n].iter().map(|c| c.re).collect()
}

fn filter_recording(rec: &Recording, filter: &SosFilter) -> Recording {
    let n = rec.n_samples();
    let plan = FftPlan::new(2 * n);
    let gains = symmetric_gains(filter, 2 * n);
    let data = rec
        .data()
        .iter()
        .map(|row| apply_with(&plan, &gains, row))
        .collect();
    rec.with_data(data)
}

/// Zero-phase Butterworth band-pass between `low_hz` and `high_hz`.
///
/// Realized as a high-pass at `low_hz` cascaded with a low-pass at `high_hz`,
/// each of order [`BANDPASS_ORDER`].
pub fn bandpass_filter(rec: &Recording, low_hz: f64, high_hz: f64) -> Result<Recording> {
    let nyquist = rec.fs() / 2.0;
    if !(low_hz.is_finite()
        && high_hz.is_finite()
        && 0.0 < low_hz
        && low_hz < high_hz
        && high_hz < nyquist)
    {
        bail!(
            Band,
            "need 0 < low < high < fs/2, got low {low_hz} Hz, high {high_hz} Hz at fs {}",
            rec.fs()
        );
    }
    let filter = butterworth_highpass(BANDPASS_ORDER, low_hz, rec.fs()).then(butterworth_lowpass(
        BANDPASS_ORDER,
        high_hz,
        rec.fs(),
    ));
    Ok(filter_recording(rec, &filter))
}

/// Zero-phase notch at `notch_hz` with quality factor [`NOTCH_Q`].
pub fn notch_filter(rec: &Recording, notch_hz: f64) -> Result<Recording> {
    if !(notch_hz.is_finite() && notch_hz > 0.0 && notch_hz < rec.fs() / 2.0) {
        bail!(
            Band,
            "notch {notch_hz} Hz must lie in (0, fs/2) at fs {}",
            rec.fs()
        );
    }
    let filter = SosFilter {
        sections: alloc::vec![notch_design(notch_hz, NOTCH_Q, rec.fs())],
    };
    Ok(filter_recording(rec, &filter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tone(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| libm::sin(2.0 * PI * freq * i as f64 / fs + 0.3))
            .collect()
    }

    fn rec(x: Vec<f64>, fs: f64) -> Recording {
        Recording::new(vec![x], fs, vec!["Cz".to_string()], vec![], "s").unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
    }

    #[test]
    fn butterworth_matches_closed_form_magnitude() {
        // |H|^2 = 1 / (1 + (tan(w/2) / tan(wc/2))^(2N)) for the bilinear Butterworth.
        let fs = 200.0;
        for &(fc, hp) in &[(0.5, true), (45.0, false), (10.0, true), (30.0, false)] {
            let f = if hp {
                butterworth_highpass(4, fc, fs)
            } else {
                butterworth_lowpass(4, fc, fs)
            };
            let kc = libm::tan(PI * fc / fs);
            for i in 1..100 {
                let w = PI * i as f64 / 100.0;
                let r = libm::tan(w / 2.0) / kc;
                let want = if hp {
                    1.0 / (1.0 + libm::pow(r, -8.0))
                } else {
                    1.0 / (1.0 + libm::pow(r, 8.0))
                };
                let got = f.power_response(w);
                assert!(
                    (got - want).abs() < 1e-9 * want.max(1e-6),
                    "fc {fc} w {w}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn notch_has_zero_at_center_and_half_power_edges() {
        let fs = 200.0;
        let n = notch_design(60.0, 30.0, fs);
        assert!(n.response(2.0 * PI * 60.0 / fs).norm() < 1e-12);
        assert!((n.response(0.0).norm() - 1.0).abs() < 1e-12);
        assert!((n.response(PI).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_bands() {
        let r = rec(tone(10.0, 200.0, 400), 200.0);
        assert!(matches!(
            bandpass_filter(&r, 50.0, 45.0),
            Err(crate::Error::Band(_))
        ));
        assert!(matches!(
            bandpass_filter(&r, 0.0, 45.0),
            Err(crate::Error::Band(_))
        ));
        assert!(matches!(
            bandpass_filter(&r, 0.5, 100.0),
            Err(crate::Error::Band(_))
        ));
        assert!(matches!(
            notch_filter(&r, 120.0),
            Err(crate::Error::Band(_))
        ));
        assert!(matches!(
            notch_filter(&r, 100.0),
            Err(crate::Error::Band(_))
        ));
    }

    #[test]
    fn passband_tone_is_preserved_and_shape_kept() {
        let x = tone(10.0, 200.0, 2000);
        let out = bandpass_filter(&rec(x.clone(), 200.0), 0.5, 45.0).unwrap();
        assert_eq!(out.n_samples(), 2000);
        assert!((rms(out.channel(0)) / rms(&x) - 1.0).abs() < 0.01);
    }

    // Steady-state gain: one second at each end is left out, where the
    // edge transients of the notch live.
    fn interior_gain(out: &Recording, x: &[f64]) -> f64 {
        let guard = 200;
        rms(&out.channel(0)[guard..x.len() - guard]) / rms(&x[guard..x.len() - guard])
    }

    #[test]
    fn notch_removes_line_tone_and_keeps_alpha() {
        let line = tone(60.0, 200.0, 4000);
        let out = notch_filter(&rec(line.clone(), 200.0), 60.0).unwrap();
        assert!(20.0 * libm::log10(interior_gain(&out, &line)) <= -40.0);
        let ten = tone(10.0, 200.0, 4000);
        let out = notch_filter(&rec(ten.clone(), 200.0), 60.0).unwrap();
        assert!((interior_gain(&out, &ten) - 1.0).abs() <= 0.01);
    }

    #[test]
    fn bandpass_removes_slow_drift() {
        let drift = tone(0.1, 200.0, 4000);
        let out = bandpass_filter(&rec(drift.clone(), 200.0), 0.5, 45.0).unwrap();
        assert!(20.0 * libm::log10(interior_gain(&out, &drift)) <= -20.0);
    }

    #[test]
    fn constant_is_removed_by_bandpass() {
        let out = bandpass_filter(&rec(vec![7.0; 500], 200.0), 0.5, 45.0).unwrap();
        assert!(rms(out.channel(0)) < 1e-9);
    }

    #[test]
    fn single_sample_and_empty() {
        assert!(apply_zero_phase(&[], &SosFilter::default()).is_empty());
        let y = apply_zero_phase(&[3.0], &SosFilter::default());
        assert!((y[0] - 3.0).abs() < 1e-12);
    }
}
