//! Rayon drivers: trials are featurized in parallel and seeds run
//! concurrently. Every worker draws from its own seeded stream, so results
//! match the serial functions in [`erpbench_core`] exactly.

use erpbench_core::classify::TrainConfig;
use erpbench_core::features::{FeatureExtractor, FeatureMatrix, FeatureSet, PyramidSpec};
use erpbench_core::harness::{
    aggregate_runs, evaluate_seed, BenchConfig, FeatureChoice, RunResult, SplitRatios,
};
use erpbench_core::patchlab::{evaluate_strategy, PatchConfig, PatchRun};
use erpbench_core::signal::TrialSet;
use erpbench_core::spectral::SpectralConfig;
use rayon::prelude::*;

use crate::io::ResultsFile;

pub fn extract_features_par(
    ts: &TrialSet,
    set: FeatureSet,
    cfg: &SpectralConfig,
    pyramid: &PyramidSpec,
) -> erpbench_core::Result<FeatureMatrix> {
    let fx = FeatureExtractor::new(set, ts.fs(), ts.n_samples(), cfg, pyramid)?;
    let rows = (0..ts.n_trials())
        .into_par_iter()
        .map(|t| fx.trial(ts.trial(t)))
        .collect::<erpbench_core::Result<Vec<_>>>()?;
    fx.assemble(ts, rows)
}

pub fn features_for_par(
    ts: &TrialSet,
    choice: FeatureChoice,
    cfg: &BenchConfig,
) -> erpbench_core::Result<FeatureMatrix> {
    let mut out: Option<FeatureMatrix> = None;
    for &set in choice.sets() {
        let m = extract_features_par(ts, set, &cfg.spectral, &cfg.pyramid)?;
        out = Some(match out {
            None => m,
            Some(prev) => prev.hstack(&m)?,
        });
    }
    Ok(out.expect("every choice has a feature set"))
}

/// Every seed of `cfg` on every named dataset, plus per-(dataset, method)
/// aggregates. Runs are ordered by dataset, then seed.
pub fn run_experiment(
    datasets: &[(String, TrialSet)],
    cfg: &BenchConfig,
) -> erpbench_core::Result<ResultsFile> {
    cfg.validate()?;
    let method = cfg.feature_set.method_name();
    let mut runs: Vec<RunResult> = Vec::new();
    for (name, ts) in datasets {
        let feats = features_for_par(ts, cfg.feature_set, cfg)?;
        let batch = cfg
            .seeds
            .par_iter()
            .map(|&s| evaluate_seed(&feats, name, method, s, cfg))
            .collect::<erpbench_core::Result<Vec<_>>>()?;
        runs.extend(batch);
    }
    let aggregate = aggregate_runs(&runs);
    Ok(ResultsFile { runs, aggregate })
}

/// Each config trained on each seed, in parallel; output is ordered by
/// config, then seed.
pub fn run_patch_bench(
    ts: &TrialSet,
    configs: &[PatchConfig],
    tcfg: &TrainConfig,
    seeds: &[u64],
    ratios: &SplitRatios,
) -> erpbench_core::Result<Vec<PatchRun>> {
    let jobs: Vec<(&PatchConfig, u64)> = configs
        .iter()
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(c, s)| evaluate_strategy(ts, c, tcfg, s, ratios))
        .collect()
}
