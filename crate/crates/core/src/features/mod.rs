//! Handcrafted feature vectors: the 31-value EEG catalog and the 91-value
//! ERP catalog, computed per channel and concatenated channel-major.

mod stats;

pub use stats::{
    hjorth_params, partition, peak_features, pyramid_pool, time_domain_stats, PyramidSpec, STD_EPS,
};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::fft::FftPlan;
use crate::signal::TrialSet;
use crate::spectral::{self, BandPowerSet, EntropySet, Psd, SpectralConfig, SpectralDescriptorSet};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    #[serde(rename = "eeg31")]
    Eeg31,
    #[serde(rename = "erp91")]
    Erp91,
}

impl FeatureSet {
    pub fn layout(self) -> FeatureLayout {
        let blocks: &[(&str, usize)] = match self {
            FeatureSet::Eeg31 => &[
                ("time_stats", 10),
                ("band_power", 11),
                ("spectral", 7),
                ("complexity", 3),
            ],
            FeatureSet::Erp91 => &[
                ("pyramid", 75),
                ("peaks", 4),
                ("freq_complexity", 9),
                ("hjorth", 3),
            ],
        };
        FeatureLayout {
            set: self,
            blocks: blocks.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
            per_channel_dim: blocks.iter().map(|b| b.1).sum(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Eeg31 => "eeg31",
            FeatureSet::Erp91 => "erp91",
        }
    }

    /// Accepts `eeg`, `eeg31`, `erp`, `erp91`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "eeg" | "eeg31" => Ok(FeatureSet::Eeg31),
            "erp" | "erp91" => Ok(FeatureSet::Erp91),
            other => bail!(Argument, "unknown feature set {other:?}"),
        }
    }

    /// Names of the per-channel features in output order.
    pub fn feature_names(self) -> Vec<String> {
        match self {
            FeatureSet::Eeg31 => {
                let mut v: Vec<String> = TIME_STAT_NAMES.iter().map(|s| s.to_string()).collect();
                v.extend(BandPowerSet::NAMES.iter().map(|s| s.to_string()));
                v.extend(SpectralDescriptorSet::NAMES.iter().map(|s| s.to_string()));
                v.extend(EntropySet::NAMES.iter().map(|s| s.to_string()));
                v
            }
            FeatureSet::Erp91 => {
                let spec = PyramidSpec::default();
                let mut v = Vec::new();
                for (level, &k) in spec.level_segments.iter().enumerate() {
                    for seg in 0..k {
                        for stat in ["mean", "std", "rms", "line_length", "ptp"] {
                            v.push(format!("pyr_l{level}_s{seg}_{stat}"));
                        }
                    }
                }
                v.extend(
                    [
                        "pos_peak_amp",
                        "pos_peak_latency",
                        "neg_peak_amp",
                        "neg_peak_latency",
                    ]
                    .map(String::from),
                );
                v.extend(
                    [
                        "rel_delta",
                        "rel_theta",
                        "rel_alpha",
                        "rel_beta",
                        "total_power",
                        "spectral_centroid",
                        "spectral_flatness",
                        "median_freq",
                        "shannon_entropy_norm",
                    ]
                    .map(String::from),
                );
                v.extend(
                    ["hjorth_activity", "hjorth_mobility", "hjorth_complexity"].map(String::from),
                );
                v
            }
        }
    }
}

pub const TIME_STAT_NAMES: [&str; 10] = [
    "mean", "median", "min", "max", "skewness", "kurtosis", "rms", "iqr", "std", "variance",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub set: FeatureSet,
    pub blocks: Vec<(String, usize)>,
    pub per_channel_dim: usize,
}

impl FeatureLayout {
    /// `channel:feature` for every column, channel-major.
    pub fn column_names<S: AsRef<str>>(&self, channel_labels: &[S]) -> Vec<String> {
        let names = self.set.feature_names();
        channel_labels
            .iter()
            .flat_map(|c| names.iter().map(move |n| format!("{}:{}", c.as_ref(), n)))
            .collect()
    }
}

/// Row-major `[n_trials × n_features]` matrix with labels and subject ids
/// copied from the source trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    pub layout: Option<FeatureLayout>,
    labels: Vec<usize>,
    subject_ids: Vec<String>,
    pub class_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        values: Vec<f64>,
        n_cols: usize,
        labels: Vec<usize>,
        subject_ids: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_rows = labels.len();
        if values.len() != n_rows * n_cols || subject_ids.len() != n_rows {
            bail!(
                Shape,
                "{} values, {} labels, {} subjects for {} columns",
                values.len(),
                n_rows,
                subject_ids.len(),
                n_cols
            );
        }
        if values.iter().any(|v| !v.is_finite()) {
            bail!(Data, "feature values must be finite");
        }
        Ok(Self {
            values,
            n_rows,
            n_cols,
            layout: None,
            labels,
            subject_ids,
            class_names,
        })
    }

    pub fn with_layout(mut self, layout: FeatureLayout) -> Result<Self> {
        if layout.per_channel_dim == 0 || !self.n_cols.is_multiple_of(layout.per_channel_dim) {
            bail!(
                Shape,
                "{} columns do not divide into {}-wide channels",
                self.n_cols,
                layout.per_channel_dim
            );
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }
    pub fn n_classes(&self) -> usize {
        self.class_names
            .len()
            .max(self.labels.iter().map(|l| l + 1).max().unwrap_or(0))
    }

    /// Rows whose subject is in `subjects`, in original order.
    pub fn select_subjects<S: AsRef<str>>(&self, subjects: &[S]) -> Self {
        let keep: Vec<usize> = (0..self.n_rows)
            .filter(|&i| subjects.iter().any(|s| s.as_ref() == self.subject_ids[i]))
            .collect();
        self.select_rows(&keep)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self {
            values,
            n_rows: rows.len(),
            n_cols: self.n_cols,
            layout: self.layout.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            subject_ids: rows.iter().map(|&r| self.subject_ids[r].clone()).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Column-wise concatenation of two matrices over the same trials.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.n_rows != other.n_rows
            || self.labels != other.labels
            || self.subject_ids != other.subject_ids
        {
            bail!(Shape, "feature matrices describe different trials");
        }
        let n_cols = self.n_cols + other.n_cols;
        let mut values = Vec::with_capacity(self.n_rows * n_cols);
        for i in 0..self.n_rows {
            values.extend_from_slice(self.row(i));
            values.extend_from_slice(other.row(i));
        }
        Ok(Self {
            values,
            n_rows: self.n_rows,
            n_cols,
            layout: None,
            labels: self.labels.clone(),
            subject_ids: self.subject_ids.clone(),
            class_names: self.class_names.clone(),
        })
    }
}

/// Precomputed window and FFT plan for a fixed trial length.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    set: FeatureSet,
    fs: f64,
    n_samples: usize,
    cfg: SpectralConfig,
    pyramid: PyramidSpec,
    window: Vec<f64>,
    plan: FftPlan,
}

impl FeatureExtractor {
    pub fn new(
        set: FeatureSet,
        fs: f64,
        n_samples: usize,
        cfg: &SpectralConfig,
        pyramid: &PyramidSpec,
    ) -> Result<Self> {
        cfg.validate()?;
        pyramid.validate()?;
        if !(fs.is_finite() && fs > 0.0) {
            bail!(Argument, "sampling rate must be positive");
        }
        let cfg = cfg.for_length(n_samples);
        let needed = 8.max(pyramid.max_segments());
        if n_samples < needed {
            return Err(crate::Error::Length {
                needed,
                got: n_samples,
            });
        }
        if cfg.total_band.1 > fs / 2.0 {
            bail!(
                Band,
                "total band reaches {} Hz above Nyquist {} Hz",
                cfg.total_band.1,
                fs / 2.0
            );
        }
        let window = cfg.window.coefficients(cfg.segment_len);
        let plan = FftPlan::new(cfg.segment_len);
        Ok(Self {
            set,
            fs,
            n_samples,
            cfg,
            pyramid: pyramid.clone(),
            window,
            plan,
        })
    }

    pub fn set(&self) -> FeatureSet {
        self.set
    }

    pub fn per_channel_dim(&self) -> usize {
        self.set.layout().per_channel_dim
    }

    fn psd(&self, x: &[f64]) -> Result<Psd> {
        spectral::welch_with(x, self.fs, self.cfg.overlap, &self.window, &self.plan)
    }

    pub fn channel(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.n_samples {
            bail!(
                Shape,
                "expected {} samples, got {}",
                self.n_samples,
                x.len()
            );
        }
        let psd = self.psd(x)?;
        match self.set {
            FeatureSet::Eeg31 => {
                out.extend_from_slice(&time_domain_stats(x)?);
                out.extend_from_slice(&spectral::band_powers(&psd, &self.cfg)?.to_array());
                out.extend_from_slice(&spectral::spectral_descriptors(&psd, &self.cfg).to_array());
                out.extend_from_slice(&spectral::spectral_entropies(&psd, &self.cfg).to_array());
            }
            FeatureSet::Erp91 => {
                out.extend(pyramid_pool(x, &self.pyramid)?);
                out.extend_from_slice(&peak_features(x)?);
                let bp = spectral::band_powers(&psd, &self.cfg)?;
                let d = spectral::spectral_descriptors(&psd, &self.cfg);
                let e = spectral::spectral_entropies(&psd, &self.cfg);
                out.extend_from_slice(&bp.relative);
                out.extend_from_slice(&[
                    bp.total,
                    d.centroid,
                    d.flatness,
                    d.median_freq,
                    e.shannon_normalized,
                ]);
                out.extend_from_slice(&hjorth_params(x)?);
            }
        }
        Ok(())
    }

    /// Features of one trial (`n_channels` rows of `n_samples`), channel-major.
    pub fn trial(&self, trial: &[f64]) -> Result<Vec<f64>> {
        if !trial.len().is_multiple_of(self.n_samples) {
            bail!(
                Shape,
                "trial length {} is not a multiple of {}",
                trial.len(),
                self.n_samples
            );
        }
        let mut out = Vec::with_capacity(trial.len() / self.n_samples * self.per_channel_dim());
        for row in trial.chunks_exact(self.n_samples) {
            self.channel(row, &mut out)?;
        }
        Ok(out)
    }

    /// Assemble a matrix from per-trial rows produced by [`Self::trial`].
    pub fn assemble(&self, ts: &TrialSet, rows: Vec<Vec<f64>>) -> Result<FeatureMatrix> {
        let n_cols = ts.n_channels() * self.per_channel_dim();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            values.extend(r);
        }
        FeatureMatrix::new(
            values,
            n_cols,
            ts.labels().to_vec(),
            ts.subject_ids().to_vec(),
            ts.class_names().to_vec(),
        )?
        .with_layout(self.set.layout())
    }
}

/// Serial extraction over all trials.
pub fn extract_features(
    ts: &TrialSet,
    set: FeatureSet,
    cfg: &SpectralConfig,
    pyramid: &PyramidSpec,
) -> Result<FeatureMatrix> {
    let fx = FeatureExtractor::new(set, ts.fs(), ts.n_samples(), cfg, pyramid)?;
    let rows = (0..ts.n_trials())
        .map(|t| fx.trial(ts.trial(t)))
        .collect::<Result<Vec<_>>>()?;
    fx.assemble(ts, rows)
}

/// Single-channel EEG vector.
pub fn eeg_feature_vector(x: &[f64], fs: f64, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    let fx = FeatureExtractor::new(FeatureSet::Eeg31, fs, x.len(), cfg, &PyramidSpec::default())?;
    fx.trial(x)
}

/// Single-channel ERP vector.
pub fn erp_feature_vector(
    x: &[f64],
    fs: f64,
    cfg: &SpectralConfig,
    pyramid: &PyramidSpec,
) -> Result<Vec<f64>> {
    let fx = FeatureExtractor::new(FeatureSet::Erp91, fs, x.len(), cfg, pyramid)?;
    fx.trial(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, &["features-test"]);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn layouts_sum_to_dims() {
        for set in [FeatureSet::Eeg31, FeatureSet::Erp91] {
            let l = set.layout();
            assert_eq!(
                l.blocks.iter().map(|b| b.1).sum::<usize>(),
                l.per_channel_dim
            );
            assert_eq!(set.feature_names().len(), l.per_channel_dim);
        }
        assert_eq!(FeatureSet::Eeg31.layout().per_channel_dim, 31);
        assert_eq!(FeatureSet::Erp91.layout().per_channel_dim, 91);
    }

    #[test]
    fn channel_major_matrix() {
        let (c, n) = (26, 200);
        let data = noise(1, 3 * c * n);
        let names: Vec<String> = (0..c).map(|i| format!("C{i}")).collect();
        let ts = TrialSet::new(
            data,
            c,
            n,
            vec![0, 1, 0],
            vec!["a".into(); 3],
            200.0,
            vec!["x".into(), "y".into()],
            names,
        )
        .unwrap();
        let eeg = extract_features(
            &ts,
            FeatureSet::Eeg31,
            &SpectralConfig::default(),
            &PyramidSpec::default(),
        )
        .unwrap();
        let erp = extract_features(
            &ts,
            FeatureSet::Erp91,
            &SpectralConfig::default(),
            &PyramidSpec::default(),
        )
        .unwrap();
        assert_eq!(eeg.n_cols(), 806);
        assert_eq!(erp.n_cols(), 2366);
        let ch3 = erp_feature_vector(
            ts.row(1, 3),
            200.0,
            &SpectralConfig::default(),
            &PyramidSpec::default(),
        )
        .unwrap();
        assert_eq!(&erp.row(1)[3 * 91..4 * 91], &ch3[..]);
        assert_eq!(eeg.hstack(&erp).unwrap().n_cols(), 806 + 2366);
    }

    #[test]
    fn short_trials_rejected() {
        assert!(eeg_feature_vector(&[1.0; 5], 200.0, &SpectralConfig::default()).is_err());
    }

    #[test]
    fn constant_input_is_finite() {
        let v = erp_feature_vector(
            &[4.0; 64],
            200.0,
            &SpectralConfig::default(),
            &PyramidSpec::default(),
        )
        .unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn scale_invariant_entries(seed in 0u64..1000, c in 0.01f64..100.0, n in 32usize..400) {
            let x = noise(seed, n);
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let cfg = SpectralConfig::default();
            let a = eeg_feature_vector(&x, 200.0, &cfg).unwrap();
            let b = eeg_feature_vector(&y, 200.0, &cfg).unwrap();
            // skew, kurtosis, ratios, relative powers, centroid, median, flatness, entropies
            for i in [4, 5, 15, 16, 17, 18, 19, 20, 21, 25, 26, 27, 28, 29, 30] {
                prop_assert!((a[i] - b[i]).abs() <= 1e-9 * (1.0 + a[i].abs()), "index {} {} {}", i, a[i], b[i]);
            }
        }

        #[test]
        fn translation_behaviour(seed in 0u64..1000, k in -50.0f64..50.0, n in 16usize..300) {
            let x = noise(seed, n);
            let y: Vec<f64> = x.iter().map(|v| v + k).collect();
            let (sa, sb) = (time_domain_stats(&x).unwrap(), time_domain_stats(&y).unwrap());
            for i in [4, 5, 8] {
                prop_assert!((sa[i] - sb[i]).abs() < 1e-9);
            }
            for i in [0, 2, 3] {
                prop_assert!((sb[i] - sa[i] - k).abs() < 1e-9);
            }
            let (pa, pb) = (peak_features(&x).unwrap(), peak_features(&y).unwrap());
            prop_assert_eq!((pa[1], pa[3]), (pb[1], pb[3]));
            prop_assert!((pb[0] - pa[0] - k).abs() < 1e-9 && (pb[2] - pa[2] - k).abs() < 1e-9);
            let (ha, hb) = (hjorth_params(&x).unwrap(), hjorth_params(&y).unwrap());
            prop_assert!((ha[1] - hb[1]).abs() < 1e-9 && (ha[2] - hb[2]).abs() < 1e-9);
            let spec = PyramidSpec::default();
            let (qa, qb) = (pyramid_pool(&x, &spec).unwrap(), pyramid_pool(&y, &spec).unwrap());
            for s in 0..15 {
                prop_assert!((qa[s * 5 + 1] - qb[s * 5 + 1]).abs() < 1e-9);
                prop_assert!((qa[s * 5 + 3] - qb[s * 5 + 3]).abs() < 1e-9);
            }
        }

        #[test]
        fn partitions_cover(len in 1usize..500, k in 1usize..20) {
            prop_assume!(len >= k);
            let parts: Vec<_> = partition(len, k).collect();
            prop_assert_eq!(parts.iter().map(|r| r.len()).sum::<usize>(), len);
            prop_assert!(parts.windows(2).all(|w| w[0].end == w[1].start));
        }

        #[test]
        fn white_noise_complexity_exceeds_one(seed in 0u64..500) {
            prop_assert!(hjorth_params(&noise(seed, 500)).unwrap()[2] > 1.0);
        }
    }
}
