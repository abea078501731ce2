//! Subject-independent evaluation, average ranks and synthetic data.

mod bench;
mod rank;
mod split;
mod synth;

pub use bench::{
    aggregate_runs, evaluate_seed, features_for, run_benchmark, run_stream_seed, score_table,
    shuffle_labels_within_subject, split_features, Aggregate, BenchConfig, FeatureChoice,
    RunResult, DEFAULT_SEEDS,
};
pub use rank::{aggregate_and_rank, Metric, RankTable, ScoreTable};
pub use split::{monte_carlo_split, SplitPlan, SplitRatios, MIN_SUBJECTS};
pub use synth::{synth_dataset, ClassEffect, SynthSpec};
