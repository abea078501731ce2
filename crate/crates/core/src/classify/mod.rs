//! Linear classifier on handcrafted features and the evaluation metrics.

mod linear;
pub mod metrics;
mod optim;

pub use linear::{
    fit_linear, softmax_in_place, train_linear, LinearModel, TrainConfig, TrainReport,
    STANDARDIZE_EPS,
};
pub use metrics::{
    accuracy, argmax_rows, auroc, average_ranks, binary_auroc, compute_metrics, macro_f1, MetricSet,
};
pub use optim::{cosine_lr, AdamW};
