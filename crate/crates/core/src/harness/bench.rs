//! Seeded subject-independent evaluation of the feature pipelines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::rank::{Metric, ScoreTable};
use super::split::{monte_carlo_split, SplitPlan, SplitRatios};
use crate::classify::{compute_metrics, fit_linear, MetricSet, TrainConfig};
use crate::error::bail;
use crate::features::{extract_features, FeatureMatrix, FeatureSet, PyramidSpec};
use crate::signal::TrialSet;
use crate::spectral::SpectralConfig;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureChoice {
    Eeg,
    Erp,
    Both,
}

impl FeatureChoice {
    pub fn method_name(self) -> &'static str {
        match self {
            FeatureChoice::Eeg => "EEG Features",
            FeatureChoice::Erp => "ERP Features",
            FeatureChoice::Both => "EEG+ERP Features",
        }
    }

    pub fn sets(self) -> &'static [FeatureSet] {
        match self {
            FeatureChoice::Eeg => &[FeatureSet::Eeg31],
            FeatureChoice::Erp => &[FeatureSet::Erp91],
            FeatureChoice::Both => &[FeatureSet::Eeg31, FeatureSet::Erp91],
        }
    }
}

pub const DEFAULT_SEEDS: [u64; 5] = [41, 42, 43, 44, 45];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub feature_set: FeatureChoice,
    pub spectral: SpectralConfig,
    pub pyramid: PyramidSpec,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub split_ratios: SplitRatios,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            feature_set: FeatureChoice::Eeg,
            spectral: SpectralConfig::default(),
            pyramid: PyramidSpec::default(),
            train: TrainConfig::default(),
            seeds: DEFAULT_SEEDS.to_vec(),
            split_ratios: SplitRatios::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.spectral.validate()?;
        self.pyramid.validate()?;
        self.train.validate()?;
        self.split_ratios.sizes(0)?;
        if self.seeds.is_empty() {
            bail!(Argument, "at least one seed is required");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub metrics: MetricSet,
}

/// Feature matrix for a choice of catalog(s).
pub fn features_for(
    ts: &TrialSet,
    choice: FeatureChoice,
    cfg: &BenchConfig,
) -> Result<FeatureMatrix> {
    let mut out: Option<FeatureMatrix> = None;
    for &set in choice.sets() {
        let m = extract_features(ts, set, &cfg.spectral, &cfg.pyramid)?;
        out = Some(match out {
            None => m,
            Some(prev) => prev.hstack(&m)?,
        });
    }
    Ok(out.expect("every choice has a feature set"))
}

/// Train/valid/test matrices for a plan, audited for subject leakage.
pub fn split_features(feats: &FeatureMatrix, plan: &SplitPlan) -> Result<[FeatureMatrix; 3]> {
    let parts = [
        feats.select_subjects(&plan.train_subjects),
        feats.select_subjects(&plan.valid_subjects),
        feats.select_subjects(&plan.test_subjects),
    ];
    let test: BTreeSet<&str> = plan.test_subjects.iter().map(String::as_str).collect();
    if parts[0]
        .subject_ids()
        .iter()
        .chain(parts[1].subject_ids())
        .any(|s| test.contains(s.as_str()))
    {
        bail!(Data, "test subject leaked into training data");
    }
    if parts[2].n_rows() == 0 {
        bail!(Size, "test split has no trials");
    }
    Ok(parts)
}

/// Training seed for one run: distinct per dataset and method, fixed by
/// the run seed.
pub fn run_stream_seed(dataset: &str, method: &str, seed: u64) -> u64 {
    crate::rng::stream_id(&[dataset, method, &format!("{seed}")])
}

pub fn evaluate_seed(
    feats: &FeatureMatrix,
    dataset: &str,
    method: &str,
    seed: u64,
    cfg: &BenchConfig,
) -> Result<RunResult> {
    let plan = monte_carlo_split(feats.subject_ids(), seed, &cfg.split_ratios)?;
    let [train, valid, test] = split_features(feats, &plan)?;
    let tc = TrainConfig {
        seed: run_stream_seed(dataset, method, seed),
        ..cfg.train.clone()
    };
    let (model, _) = fit_linear(&train, &valid, &tc)?;
    let probs = model.predict_proba(&test)?;
    let metrics = compute_metrics(&probs, model.n_classes(), test.labels())?;
    Ok(RunResult {
        dataset: dataset.into(),
        method: method.into(),
        seed,
        metrics,
    })
}

/// One result per configured seed, evaluated serially.
pub fn run_benchmark(dataset: &str, ts: &TrialSet, cfg: &BenchConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let feats = features_for(ts, cfg.feature_set, cfg)?;
    let method = cfg.feature_set.method_name();
    cfg.seeds
        .iter()
        .map(|&s| evaluate_seed(&feats, dataset, method, s, cfg))
        .collect()
}

/// Permutes labels among each subject's trials; class balance per subject is
/// preserved while any signal-label association is destroyed.
pub fn shuffle_labels_within_subject(ts: &TrialSet, seed: u64) -> Result<TrialSet> {
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in ts.subject_ids().iter().enumerate() {
        by_subject.entry(s.as_str()).or_default().push(i);
    }
    let mut labels = ts.labels().to_vec();
    for (subject, idx) in by_subject {
        let mut rng = crate::rng::stream(seed, &["label-shuffle", subject]);
        let mut vals: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        vals.shuffle(&mut rng);
        for (i, v) in idx.into_iter().zip(vals) {
            labels[i] = v;
        }
    }
    ts.with_labels(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub method: String,
    pub n_runs: usize,
    pub mean: MetricSet,
    /// Population standard deviation over runs.
    pub std: MetricSet,
}

pub fn aggregate_runs(runs: &[RunResult]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(&str, &str), Vec<&MetricSet>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.dataset.as_str(), r.method.as_str()))
            .or_default()
            .push(&r.metrics);
    }
    groups
        .into_iter()
        .map(|((dataset, method), ms)| {
            let n = ms.len() as f64;
            let stat = |f: fn(&MetricSet) -> f64| {
                let mean = ms.iter().map(|m| f(m)).sum::<f64>() / n;
                let var = ms
                    .iter()
                    .map(|m| (f(m) - mean) * (f(m) - mean))
                    .sum::<f64>()
                    / n;
                (mean, libm::sqrt(var))
            };
            let (a, f, u) = (
                stat(|m| m.accuracy),
                stat(|m| m.f1_macro),
                stat(|m| m.auroc),
            );
            Aggregate {
                dataset: dataset.into(),
                method: method.into(),
                n_runs: ms.len(),
                mean: MetricSet {
                    accuracy: a.0,
                    f1_macro: f.0,
                    auroc: u.0,
                },
                std: MetricSet {
                    accuracy: a.1,
                    f1_macro: f.1,
                    auroc: u.1,
                },
            }
        })
        .collect()
}

/// Mean scores arranged for ranking.
pub fn score_table(aggregates: &[Aggregate]) -> ScoreTable {
    let mut t = ScoreTable::new();
    for a in aggregates {
        for metric in Metric::ALL {
            t.entry((a.dataset.clone(), metric))
                .or_default()
                .insert(a.method.clone(), metric.of(&a.mean));
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth_dataset, ClassEffect, SynthSpec};

    fn small(effect: ClassEffect) -> TrialSet {
        let spec = SynthSpec {
            n_subjects: 10,
            trials_per_subject: 20,
            n_channels: 2,
            effect,
            ..Default::default()
        };
        synth_dataset(&spec, 3).unwrap()
    }

    #[test]
    fn one_result_per_seed() {
        let ts = small(ClassEffect::BandPower {
            freq_hz: 10.0,
            amplitude_uv: 8.0,
        });
        let cfg = BenchConfig {
            train: TrainConfig {
                max_epochs: 20,
                patience: 5,
                ..Default::default()
            },
            ..Default::default()
        };
        let runs = run_benchmark("toy", &ts, &cfg).unwrap();
        assert_eq!(runs.len(), 5);
        assert_eq!(
            runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
            DEFAULT_SEEDS.to_vec()
        );
        let agg = aggregate_runs(&runs);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].n_runs, 5);
        let mean_auc = runs.iter().map(|r| r.metrics.auroc).sum::<f64>() / 5.0;
        assert!((agg[0].mean.auroc - mean_auc).abs() < 1e-12);
        assert_eq!(runs, run_benchmark("toy", &ts, &cfg).unwrap());
    }

    #[test]
    fn shuffle_keeps_subject_balance() {
        let ts = small(ClassEffect::None);
        let sh = shuffle_labels_within_subject(&ts, 1).unwrap();
        assert_ne!(sh.labels(), ts.labels());
        for s in ts.subjects() {
            let count = |t: &TrialSet| {
                t.labels()
                    .iter()
                    .zip(t.subject_ids())
                    .filter(|(l, id)| **l == 1 && **id == s)
                    .count()
            };
            assert_eq!(count(&ts), count(&sh));
        }
    }

    #[test]
    fn aggregate_std_is_population() {
        let run = |seed, acc| RunResult {
            dataset: "d".into(),
            method: "m".into(),
            seed,
            metrics: MetricSet {
                accuracy: acc,
                f1_macro: 0.5,
                auroc: 0.5,
            },
        };
        let agg = aggregate_runs(&[run(1, 0.2), run(2, 0.4)]);
        assert!(
            (agg[0].mean.accuracy - 0.3).abs() < 1e-12 && (agg[0].std.accuracy - 0.1).abs() < 1e-12
        );
        assert_eq!(agg[0].std.f1_macro, 0.0);
        let t = score_table(&agg);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn split_leak_audit() {
        let ts = small(ClassEffect::None);
        let feats = features_for(&ts, FeatureChoice::Eeg, &BenchConfig::default()).unwrap();
        let mut plan = monte_carlo_split(feats.subject_ids(), 1, &SplitRatios::default()).unwrap();
        split_features(&feats, &plan).unwrap();
        plan.train_subjects.push(plan.test_subjects[0].clone());
        assert!(split_features(&feats, &plan).is_err());
    }
}
