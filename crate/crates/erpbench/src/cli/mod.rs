//! `erpbench` subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use erpbench_core::classify::{compute_metrics, fit_linear, TrainConfig};
use erpbench_core::harness::{
    aggregate_and_rank, monte_carlo_split, score_table, split_features, synth_dataset, BenchConfig,
    FeatureChoice, SplitPlan, SplitRatios, SynthSpec, DEFAULT_SEEDS,
};
use erpbench_core::patchlab::{gradcheck_case, PatchConfig, Strategy};
use erpbench_core::signal::{
    eeg_channel_mask, preprocess, EpochSpec, LabelMap, PreprocessSpec, TrialSet,
};

use crate::io::{
    load_fixture, read_erpb, read_erpb_manifest, read_features, read_json, read_recordings,
    write_erpb, write_features, write_json, write_linear_model, ExperimentConfig, ResultsFile,
};
use crate::parallel::{features_for_par, run_experiment, run_patch_bench};

#[derive(Debug, Parser)]
#[command(
    name = "erpbench",
    version,
    about = "Handcrafted-feature baselines for ERP classification"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continuous recordings to an ERPB trial dataset.
    Preprocess(PreprocessArgs),
    /// Feature matrix from an ERPB dataset.
    Extract(ExtractArgs),
    /// Seeded subject split of an ERPB dataset.
    Split(SplitArgs),
    /// Fit the linear classifier on a feature file and score the test subjects.
    Train(TrainArgs),
    /// Full seeded benchmark from an experiment config.
    Run(RunArgs),
    /// Average ranks from a results file or the published score tables.
    Ranks(RanksArgs),
    /// Synthetic ERPB dataset.
    Synth(SynthArgs),
    /// Finite-difference check of the patch encoder gradients.
    Gradcheck(GradcheckArgs),
    /// Train the three tokenization strategies on an ERPB dataset.
    Patchbench(PatchbenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChoiceArg {
    Eeg,
    Erp,
    Both,
}

impl From<ChoiceArg> for FeatureChoice {
    fn from(c: ChoiceArg) -> Self {
        match c {
            ChoiceArg::Eeg => FeatureChoice::Eeg,
            ChoiceArg::Erp => FeatureChoice::Erp,
            ChoiceArg::Both => FeatureChoice::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory of recording manifests.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output ERPB directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "dataset")]
    pub name: String,
    /// Line-noise frequency; 0 disables the notch.
    #[arg(long, default_value_t = 50.0)]
    pub notch: f64,
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"], default_values_t = [0.3, 75.0])]
    pub band: Vec<f64>,
    /// Target sampling rate.
    #[arg(long, default_value_t = 200.0)]
    pub fs: f64,
    #[arg(long, num_args = 2, value_names = ["T0", "T1"], allow_negative_numbers = true, default_values_t = [-0.2, 0.8])]
    pub epoch: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["B0", "B1"], allow_negative_numbers = true, default_values_t = [-0.2, 0.0])]
    pub baseline: Vec<f64>,
    /// Drop trials whose peak-to-peak amplitude exceeds this many µV.
    #[arg(long)]
    pub ptp_reject: Option<f64>,
    /// Event labels kept as classes, in class-index order (default: all, sorted).
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    /// Extra channel labels to drop, on top of each manifest's non-EEG list.
    #[arg(long, value_delimiter = ',')]
    pub drop_channels: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in", required_unless_present = "print_layout")]
    pub input: Option<PathBuf>,
    #[arg(long, required_unless_present = "print_layout")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "eeg")]
    pub set: ChoiceArg,
    /// Print the per-channel feature layout and exit.
    #[arg(long)]
    pub print_layout: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// ERPB dataset whose subjects are split.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Split plan from `erpbench split`.
    #[arg(long)]
    pub split: PathBuf,
    /// Training hyperparameters as JSON (defaults otherwise).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RanksArgs {
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Dataset spec as JSON (defaults otherwise).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// multi, uni, whole or all.
    #[arg(long, default_value = "all")]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct PatchbenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
    pub seeds: Vec<u64>,
    /// Comma-separated strategies (default: all three).
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Extract(a) => cmd_extract(&a),
        Command::Split(a) => cmd_split(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Ranks(a) => cmd_ranks(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Gradcheck(a) => cmd_gradcheck(&a),
        Command::Patchbench(a) => cmd_patchbench(&a),
    }
}

fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let recordings = read_recordings(&a.input)?;
    let spec = PreprocessSpec {
        notch_hz: (a.notch > 0.0).then_some(a.notch),
        band: (a.band[0], a.band[1]),
        target_fs: a.fs,
        epoch: EpochSpec::new((a.epoch[0], a.epoch[1]), (a.baseline[0], a.baseline[1]))?,
        ptp_reject_uv: a.ptp_reject,
    };
    let classes: Vec<String> = if a.classes.is_empty() {
        let all: BTreeSet<&str> = recordings
            .iter()
            .flat_map(|(_, r)| r.events().iter().map(|e| e.label.as_str()))
            .collect();
        all.into_iter().map(String::from).collect()
    } else {
        a.classes.clone()
    };
    let labels = LabelMap::from_classes(&classes);
    let mut out: Option<TrialSet> = None;
    let (mut skipped, mut unmapped, mut rejected) = (0, 0, 0);
    for (m, rec) in &recordings {
        let drop: Vec<&str> = m
            .non_eeg_channels
            .iter()
            .chain(&a.drop_channels)
            .map(String::as_str)
            .collect();
        let mask = eeg_channel_mask(
            &rec.channel_labels()
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>(),
            &drop,
        );
        let eeg = rec.select_channels(|i, _| mask[i])?;
        let bad: Vec<usize> = eeg
            .channel_labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| m.bad_channels.iter().any(|b| b.eq_ignore_ascii_case(l)))
            .map(|(i, _)| i)
            .collect();
        let r = preprocess(&eeg, &bad, &spec, &labels)
            .with_context(|| format!("preprocessing {}", m.subject_id))?;
        skipped += r.boundary_skips;
        unmapped += r.unmapped;
        rejected += r.rejected;
        match &mut out {
            None => out = Some(r.trials),
            Some(ts) => ts
                .extend(&r.trials)
                .with_context(|| format!("merging {}", m.subject_id))?,
        }
    }
    let ts = out.context("no recordings")?;
    write_erpb(&ts, &a.name, &a.out)?;
    println!(
        "{} trials from {} recordings ({} channels × {} samples); skipped {skipped} at boundaries, {unmapped} unmapped, {rejected} rejected",
        ts.n_trials(),
        recordings.len(),
        ts.n_channels(),
        ts.n_samples()
    );
    Ok(())
}

fn cmd_extract(a: &ExtractArgs) -> Result<()> {
    let choice = FeatureChoice::from(a.set);
    if a.print_layout {
        for set in choice.sets() {
            let layout = set.layout();
            println!(
                "{}: {} features per channel",
                set.name(),
                layout.per_channel_dim
            );
            for (block, n) in &layout.blocks {
                println!("  {block}: {n}");
            }
        }
        return Ok(());
    }
    let (input, out) = (
        a.input.as_ref().expect("clap enforces --in"),
        a.out.as_ref().expect("clap enforces --out"),
    );
    let (_, ts) = read_erpb(input)?;
    let cfg = BenchConfig {
        feature_set: choice,
        ..Default::default()
    };
    let feats = features_for_par(&ts, choice, &cfg)?;
    write_features(out, &feats, ts.channel_labels())?;
    println!("{} trials × {} features", feats.n_rows(), feats.n_cols());
    Ok(())
}

fn cmd_split(a: &SplitArgs) -> Result<()> {
    let m = read_erpb_manifest(&a.data)?;
    let subjects: Vec<&str> = m.trials.iter().map(|t| t.subject_id.as_str()).collect();
    let ratios = SplitRatios::default();
    let plan = monte_carlo_split(&subjects, a.seed, &ratios)?;
    plan.audit(&subjects, &ratios)?;
    write_json(&a.out, &plan)?;
    println!(
        "{} train / {} valid / {} test subjects",
        plan.train_subjects.len(),
        plan.valid_subjects.len(),
        plan.test_subjects.len()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let (_, feats) = read_features(&a.features)?;
    let plan: SplitPlan = read_json(&a.split)?;
    let cfg: TrainConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    let [train, valid, test] = split_features(&feats, &plan)?;
    let (model, report) = fit_linear(&train, &valid, &cfg)?;
    let metrics = compute_metrics(
        &model.predict_proba(&test)?,
        model.n_classes(),
        test.labels(),
    )?;
    write_linear_model(&a.out, &model, &feats.class_names)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "report": report, "test": metrics }))?
    );
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg: ExperimentConfig = read_json(&a.config)?;
    let cfg = cfg.resolve(a.config.parent().unwrap_or(Path::new(".")));
    let datasets = cfg
        .datasets
        .iter()
        .map(|d| read_erpb(d).map(|(m, ts)| (m.dataset_name, ts)))
        .collect::<crate::Result<Vec<_>>>()?;
    let results = run_experiment(&datasets, &cfg.bench)?;
    write_json(&a.out, &results)?;
    for agg in &results.aggregate {
        println!(
            "{:<24} {:<18} acc {:.4}±{:.4}  f1 {:.4}±{:.4}  auroc {:.4}±{:.4}",
            agg.dataset,
            agg.method,
            agg.mean.accuracy,
            agg.std.accuracy,
            agg.mean.f1_macro,
            agg.std.f1_macro,
            agg.mean.auroc,
            agg.std.auroc
        );
    }
    Ok(())
}

fn cmd_ranks(a: &RanksArgs) -> Result<()> {
    let table = match (&a.results, &a.fixtures) {
        (Some(p), _) => score_table(&read_json::<ResultsFile>(p)?.aggregate),
        (None, Some(p)) => load_fixture(p)?.score_table(),
        (None, None) => bail!("one of --results or --fixtures is required"),
    };
    let ranks = aggregate_and_rank(&table)?;
    println!("average rank over {} cells", ranks.n_cells);
    for (method, r) in ranks.ordered() {
        println!("{method:<20} {r:.4}");
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec: SynthSpec = match &a.spec {
        Some(p) => read_json(p)?,
        None => SynthSpec::default(),
    };
    let ts = synth_dataset(&spec, a.seed)?;
    write_erpb(&ts, &spec.name, &a.out)?;
    println!("{} trials from {} subjects", ts.n_trials(), spec.n_subjects);
    Ok(())
}

fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>> {
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(Strategy::ALL.to_vec());
    }
    Ok(names
        .iter()
        .map(|n| Strategy::parse(n))
        .collect::<erpbench_core::Result<_>>()?)
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<()> {
    let mut failed = false;
    for s in parse_strategies(std::slice::from_ref(&a.strategy))? {
        let report = gradcheck_case(s, a.seed, a.tolerance)?;
        println!(
            "{:<6} max relative error {:.3e} {}",
            s.name(),
            report.max_rel_err,
            if report.passed { "ok" } else { "FAILED" }
        );
        for t in report.tensors.iter().filter(|t| !t.passed) {
            println!(
                "  {}: {:.3e} over {} entries",
                t.name, t.max_rel_err, t.checked
            );
        }
        failed |= !report.passed;
    }
    if failed {
        bail!("gradient check failed");
    }
    Ok(())
}

fn cmd_patchbench(a: &PatchbenchArgs) -> Result<()> {
    let (_, ts) = read_erpb(&a.data)?;
    let configs: Vec<PatchConfig> = parse_strategies(&a.strategies)?
        .into_iter()
        .map(|s| PatchConfig::reference(s, ts.n_samples(), ts.n_channels(), ts.n_classes()))
        .collect();
    for c in &configs {
        c.validate()
            .with_context(|| format!("{} strategy", c.strategy.name()))?;
    }
    let tcfg = TrainConfig {
        lr: a.lr,
        max_epochs: a.epochs,
        patience: a.patience,
        batch_size: a.batch_size,
        ..Default::default()
    };
    let runs = run_patch_bench(&ts, &configs, &tcfg, &a.seeds, &SplitRatios::default())?;
    write_json(&a.out, &runs)?;
    for r in &runs {
        println!(
            "{:<6} seed {:<4} tokens {:<4} params {:<7} acc {:.4} f1 {:.4} auroc {:.4}",
            r.strategy.name(),
            r.seed,
            r.n_tokens,
            r.param_count,
            r.metrics.accuracy,
            r.metrics.f1_macro,
            r.metrics.auroc
        );
    }
    Ok(())
}
