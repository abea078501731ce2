//! Welch power spectral density and the frequency-domain quantities shared by
//! both feature catalogs: band powers, spectral shape descriptors and
//! spectral entropies.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::fft::{Complex64, FftPlan};
use crate::Result;

/// Guard added to ratio and relative-power denominators, as a fraction of the
/// PSD's total power so that ratios stay exactly scale invariant.
pub const RATIO_EPS: f64 = 1e-12;
/// PSD bins are floored at this fraction of the peak inside the flatness
/// geometric mean.
pub const FLATNESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    Hann,
    Hamming,
    Rectangular,
}

impl Taper {
    /// Periodic (DFT-even) window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / n as f64;
                match self {
                    Taper::Hann => 0.5 - 0.5 * libm::cos(x),
                    Taper::Hamming => 0.54 - 0.46 * libm::cos(x),
                    Taper::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: BandName,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl BandDefinition {
    pub const fn new(name: BandName, f_lo: f64, f_hi: f64) -> Self {
        Self { name, f_lo, f_hi }
    }
}

/// Welch parameters, band edges and descriptor constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Segment length in samples; signals shorter than this use their own
    /// length via [`SpectralConfig::for_length`].
    pub segment_len: usize,
    pub overlap: f64,
    pub window: Taper,
    /// Delta, theta, alpha, beta, in that order.
    pub bands: Vec<BandDefinition>,
    pub rolloff_fraction: f64,
    pub tsallis_q: f64,
    pub total_band: (f64, f64),
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            segment_len: 256,
            overlap: 0.5,
            window: Taper::Hann,
            bands: vec![
                BandDefinition::new(BandName::Delta, 0.5, 4.0),
                BandDefinition::new(BandName::Theta, 4.0, 8.0),
                BandDefinition::new(BandName::Alpha, 8.0, 13.0),
                BandDefinition::new(BandName::Beta, 13.0, 30.0),
            ],
            rolloff_fraction: 0.85,
            tsallis_q: 2.0,
            total_band: (0.5, 45.0),
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_len < 8 {
            bail!(
                Argument,
                "segment length must be at least 8 samples, got {}",
                self.segment_len
            );
        }
        if !(0.0..1.0).contains(&self.overlap) {
            bail!(Argument, "overlap must lie in [0, 1), got {}", self.overlap);
        }
        if !(self.rolloff_fraction > 0.0 && self.rolloff_fraction < 1.0) {
            bail!(
                Argument,
                "roll-off fraction must lie in (0, 1), got {}",
                self.rolloff_fraction
            );
        }
        if !self.tsallis_q.is_finite() || (self.tsallis_q - 1.0).abs() < 1e-12 {
            bail!(Argument, "Tsallis q must be finite and different from 1");
        }
        let (lo, hi) = self.total_band;
        if !(lo > 0.0 && lo < hi) {
            bail!(Band, "total band [{lo}, {hi}] is invalid");
        }
        let expected = [
            BandName::Delta,
            BandName::Theta,
            BandName::Alpha,
            BandName::Beta,
        ];
        if self.bands.len() != 4 || self.bands.iter().zip(expected).any(|(b, e)| b.name != e) {
            bail!(
                Band,
                "bands must be delta, theta, alpha, beta in that order"
            );
        }
        for b in &self.bands {
            if !(b.f_lo > 0.0 && b.f_lo < b.f_hi) {
                bail!(
                    Band,
                    "{:?} band [{}, {}] is invalid",
                    b.name,
                    b.f_lo,
                    b.f_hi
                );
            }
            if b.f_lo < lo || b.f_hi > hi {
                bail!(
                    Band,
                    "{:?} band [{}, {}] leaves the total band",
                    b.name,
                    b.f_lo,
                    b.f_hi
                );
            }
        }
        if self.bands.windows(2).any(|w| w[1].f_lo < w[0].f_hi) {
            bail!(Band, "bands overlap");
        }
        Ok(())
    }

    /// Copy with the segment length capped at `n_samples`.
    pub fn for_length(&self, n_samples: usize) -> Self {
        Self {
            segment_len: self.segment_len.min(n_samples),
            ..self.clone()
        }
    }
}

/// One-sided power spectral density in units²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    freqs: Vec<f64>,
    power: Vec<f64>,
    df: f64,
}

impl Psd {
    pub fn new(freqs: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if freqs.len() != power.len() || freqs.len() < 2 {
            bail!(Shape, "need at least two matching frequency and power bins");
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            bail!(Argument, "frequencies must be strictly increasing");
        }
        if power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            bail!(Data, "power must be finite and non-negative");
        }
        let df = freqs[1] - freqs[0];
        Ok(Self { freqs, power, df })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }
    pub fn power(&self) -> &[f64] {
        &self.power
    }
    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Trapezoidal integral over `[lo, hi]`, interpolating the PSD linearly at
    /// band edges that fall between bins.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64> {
        let (f0, f1) = (self.freqs[0], *self.freqs.last().unwrap());
        if !(lo >= f0 && hi <= f1 && lo <= hi) {
            bail!(
                Band,
                "band [{lo}, {hi}] Hz is outside the spectrum [{f0}, {f1}] Hz"
            );
        }
        let at = |f: f64| -> f64 {
            let i = self
                .freqs
                .partition_point(|&x| x <= f)
                .clamp(1, self.freqs.len() - 1);
            let (xa, xb) = (self.freqs[i - 1], self.freqs[i]);
            let t = (f - xa) / (xb - xa);
            self.power[i - 1] + t * (self.power[i] - self.power[i - 1])
        };
        let mut xs: Vec<(f64, f64)> = vec![(lo, at(lo))];
        xs.extend(
            self.freqs
                .iter()
                .zip(&self.power)
                .filter(|(f, _)| **f > lo && **f < hi)
                .map(|(f, p)| (*f, *p)),
        );
        xs.push((hi, at(hi)));
        Ok(xs
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum())
    }
}

/// Welch estimate: mean-removed signal, tapered overlapping segments,
/// averaged one-sided periodograms scaled to density.
pub fn welch_psd(signal: &[f64], fs: f64, cfg: &SpectralConfig) -> Result<Psd> {
    let seg = cfg.segment_len;
    if seg < 2 {
        bail!(Argument, "segment length must be at least 2");
    }
    if signal.len() < seg {
        return Err(crate::Error::Length {
            needed: seg,
            got: signal.len(),
        });
    }
    if !(fs.is_finite() && fs > 0.0) {
        bail!(Argument, "sampling rate must be positive");
    }
    let window = cfg.window.coefficients(seg);
    let plan = FftPlan::new(seg);
    welch_with(signal, fs, cfg.overlap, &window, &plan)
}

pub(crate) fn welch_with(
    signal: &[f64],
    fs: f64,
    overlap: f64,
    window: &[f64],
    plan: &FftPlan,
) -> Result<Psd> {
    let seg = window.len();
    let step = (seg - libm::floor(seg as f64 * overlap) as usize).max(1);
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut n_segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= signal.len() {
        for ((b, x), w) in buf.iter_mut().zip(&signal[start..start + seg]).zip(window) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        plan.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        n_segments += 1;
        start += step;
    }
    if !signal.iter().all(|v| v.is_finite()) {
        bail!(Data, "signal contains non-finite samples");
    }
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let scale = 1.0 / (fs * w2 * n_segments as f64);
    let nyquist_bin = if seg.is_multiple_of(2) {
        Some(seg / 2)
    } else {
        None
    };
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || Some(k) == nyquist_bin {
                1.0
            } else {
                2.0
            };
            a * scale * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * fs / seg as f64).collect();
    Psd::new(freqs, power)
}

/// Absolute and relative band powers with the two classic ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPowerSet {
    /// Delta, theta, alpha, beta.
    pub absolute: [f64; 4],
    pub total: f64,
    pub theta_alpha: f64,
    pub alpha_beta: f64,
    pub relative: [f64; 4],
}

impl BandPowerSet {
    pub const NAMES: [&'static str; 11] = [
        "abs_delta",
        "abs_theta",
        "abs_alpha",
        "abs_beta",
        "total_power",
        "theta_alpha_ratio",
        "alpha_beta_ratio",
        "rel_delta",
        "rel_theta",
        "rel_alpha",
        "rel_beta",
    ];

    pub fn to_array(&self) -> [f64; 11] {
        let a = self.absolute;
        let r = self.relative;
        [
            a[0],
            a[1],
            a[2],
            a[3],
            self.total,
            self.theta_alpha,
            self.alpha_beta,
            r[0],
            r[1],
            r[2],
            r[3],
        ]
    }
}

pub fn band_powers(psd: &Psd, cfg: &SpectralConfig) -> Result<BandPowerSet> {
    let mut absolute = [0.0; 4];
    for (slot, band) in absolute.iter_mut().zip(&cfg.bands) {
        *slot = psd.integrate(band.f_lo, band.f_hi)?;
    }
    let total = psd.integrate(cfg.total_band.0, cfg.total_band.1)?;
    let guard = RATIO_EPS * psd.total() * psd.df();
    let ratio = |num: f64, den: f64| {
        if den + guard > 0.0 {
            num / (den + guard)
        } else {
            0.0
        }
    };
    let relative = absolute.map(|a| ratio(a, total));
    Ok(BandPowerSet {
        absolute,
        total,
        theta_alpha: ratio(absolute[1], absolute[2]),
        alpha_beta: ratio(absolute[2], absolute[3]),
        relative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralDescriptorSet {
    pub centroid: f64,
    pub rolloff: f64,
    pub peak_freq: f64,
    pub peak_power: f64,
    pub mean_freq: f64,
    pub median_freq: f64,
    pub flatness: f64,
}

impl SpectralDescriptorSet {
    pub const NAMES: [&'static str; 7] = [
        "spectral_centroid",
        "rolloff_freq",
        "peak_freq",
        "peak_power",
        "mean_freq",
        "median_freq",
        "spectral_flatness",
    ];

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.centroid,
            self.rolloff,
            self.peak_freq,
            self.peak_power,
            self.mean_freq,
            self.median_freq,
            self.flatness,
        ]
    }
}

fn cumulative_crossing(psd: &Psd, fraction: f64, total: f64) -> f64 {
    let target = fraction * total;
    let mut acc = 0.0;
    for (f, p) in psd.freqs.iter().zip(&psd.power) {
        acc += p;
        if acc >= target {
            return *f;
        }
    }
    *psd.freqs.last().unwrap()
}

pub fn spectral_descriptors(psd: &Psd, cfg: &SpectralConfig) -> SpectralDescriptorSet {
    let total = psd.total();
    if !(total > 0.0) {
        return SpectralDescriptorSet::default();
    }
    let centroid = psd
        .freqs
        .iter()
        .zip(&psd.power)
        .map(|(f, p)| f * p)
        .sum::<f64>()
        / total;
    let (peak_idx, peak_power) =
        psd.power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| {
                if p > bp {
                    (i, p)
                } else {
                    (bi, bp)
                }
            });
    let floor = FLATNESS_FLOOR * peak_power;
    let n = psd.power.len() as f64;
    let log_mean = psd
        .power
        .iter()
        .map(|&p| libm::log(p.max(floor)))
        .sum::<f64>()
        / n;
    let flatness = (libm::exp(log_mean) / (total / n)).clamp(0.0, 1.0);
    SpectralDescriptorSet {
        centroid,
        rolloff: cumulative_crossing(psd, cfg.rolloff_fraction, total),
        peak_freq: psd.freqs[peak_idx],
        peak_power,
        mean_freq: centroid,
        median_freq: cumulative_crossing(psd, 0.5, total),
        flatness,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropySet {
    pub shannon: f64,
    pub shannon_normalized: f64,
    pub tsallis: f64,
}

impl EntropySet {
    pub const NAMES: [&'static str; 3] =
        ["shannon_entropy", "shannon_entropy_norm", "tsallis_entropy"];

    pub fn to_array(&self) -> [f64; 3] {
        [self.shannon, self.shannon_normalized, self.tsallis]
    }
}

/// Shannon (natural log), normalized Shannon and Tsallis entropy of the PSD
/// read as a probability distribution over bins.
pub fn spectral_entropies(psd: &Psd, cfg: &SpectralConfig) -> EntropySet {
    let total = psd.total();
    if !(total > 0.0) {
        return EntropySet::default();
    }
    let q = cfg.tsallis_q;
    let (mut h, mut sq) = (0.0, 0.0);
    for &p in &psd.power {
        let pi = p / total;
        if pi > 0.0 {
            h -= pi * libm::log(pi);
            sq += libm::pow(pi, q);
        }
    }
    let h = h.max(0.0);
    EntropySet {
        shannon: h,
        shannon_normalized: (h / libm::log(psd.power.len() as f64)).clamp(0.0, 1.0),
        tsallis: (1.0 - sq) / (q - 1.0),
    }
}

/// Names for diagnostics.
pub fn band_label(name: BandName) -> String {
    String::from(match name {
        BandName::Delta => "delta",
        BandName::Theta => "theta",
        BandName::Alpha => "alpha",
        BandName::Beta => "beta",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};

    fn tone(freqs: &[f64], fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                freqs
                    .iter()
                    .map(|f| libm::sin(2.0 * PI * f * i as f64 / fs + 0.3))
                    .sum()
            })
            .collect()
    }

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, &["noise"]);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn uniform_psd_entropies_are_analytic() {
        let psd = Psd::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0; 4]).unwrap();
        let e = spectral_entropies(&psd, &SpectralConfig::default());
        assert!((e.shannon - libm::log(4.0)).abs() < 1e-12);
        assert!((e.shannon_normalized - 1.0).abs() < 1e-12);
        assert!((e.tsallis - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_bin_has_zero_entropy() {
        let psd = Psd::new(vec![0.0, 1.0, 2.0], vec![0.0, 5.0, 0.0]).unwrap();
        let e = spectral_entropies(&psd, &SpectralConfig::default());
        assert_eq!(e.to_array(), [0.0; 3]);
    }

    #[test]
    fn short_signal_is_length_error() {
        let cfg = SpectralConfig {
            segment_len: 64,
            ..Default::default()
        };
        assert_eq!(
            welch_psd(&[0.0; 7], 200.0, &cfg),
            Err(crate::Error::Length { needed: 64, got: 7 })
        );
    }

    #[test]
    fn parseval_holds_on_long_noise() {
        // 100 half-overlapping segments of the default length.
        let cfg = SpectralConfig::default();
        let n = cfg.segment_len * 101 / 2;
        for seed in 0..20 {
            let x = noise(seed, n);
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let psd = welch_psd(&x, 200.0, &cfg).unwrap();
            assert!(
                (psd.total() * psd.df() / var - 1.0).abs() < 0.02,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn tone_peak_lands_on_its_bin() {
        let psd = welch_psd(
            &tone(&[10.0], 200.0, 2000),
            200.0,
            &SpectralConfig::default(),
        )
        .unwrap();
        let d = spectral_descriptors(&psd, &SpectralConfig::default());
        assert!((d.peak_freq - 10.0).abs() <= psd.df());
        assert!((d.median_freq - 10.0).abs() <= psd.df());
        assert!(d.flatness < 0.2);
    }

    #[test]
    fn two_tone_centroid_sits_between() {
        let psd = welch_psd(
            &tone(&[8.0, 12.0], 200.0, 4000),
            200.0,
            &SpectralConfig::default(),
        )
        .unwrap();
        let d = spectral_descriptors(&psd, &SpectralConfig::default());
        assert!(
            (d.centroid - 10.0).abs() <= psd.df(),
            "centroid {}",
            d.centroid
        );
        assert_eq!(d.centroid, d.mean_freq);
    }

    #[test]
    fn zero_signal_yields_zero_features() {
        let cfg = SpectralConfig::default();
        let psd = welch_psd(&[0.0; 400], 200.0, &cfg).unwrap();
        let bp = band_powers(&psd, &cfg).unwrap();
        assert_eq!(bp.to_array(), [0.0; 11]);
        assert_eq!(spectral_descriptors(&psd, &cfg).to_array(), [0.0; 7]);
    }

    #[test]
    fn white_noise_relative_power_tracks_bandwidth() {
        let cfg = SpectralConfig::default();
        let x = noise(3, 200 * 200);
        let psd = welch_psd(&x, 200.0, &cfg).unwrap();
        let bp = band_powers(&psd, &cfg).unwrap();
        for (rel, band) in bp.relative.iter().zip(&cfg.bands) {
            let expect = (band.f_hi - band.f_lo) / (cfg.total_band.1 - cfg.total_band.0);
            assert!(
                (rel / expect - 1.0).abs() < 0.10,
                "{:?}: {rel} vs {expect}",
                band.name
            );
        }
        assert!(spectral_descriptors(&psd, &cfg).flatness >= 0.8);
    }

    #[test]
    fn integration_interpolates_partial_bins() {
        // linear PSD p(f) = f integrates exactly under the trapezoid rule
        let psd = Psd::new(
            (0..11).map(|i| i as f64).collect(),
            (0..11).map(|i| i as f64).collect(),
        )
        .unwrap();
        assert!((psd.integrate(0.5, 4.25).unwrap() - (4.25f64 * 4.25 - 0.25) / 2.0).abs() < 1e-12);
        assert!(psd.integrate(0.5, 11.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SpectralConfig::default().validate().is_ok());
        let mut cfg = SpectralConfig::default();
        cfg.bands.swap(0, 1);
        assert!(cfg.validate().is_err());
        assert!(SpectralConfig {
            tsallis_q: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SpectralConfig {
            segment_len: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
        let _ = crate::rng::stream(0, &[]).random::<u8>();
    }
}
