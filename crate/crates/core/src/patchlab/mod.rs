//! Patch-embedding comparison on a single-block, single-head encoder.
//!
//! Three tokenizers cut a `C × T` trial into tokens: `multi` takes `L × C`
//! blocks (`⌈T/L⌉` tokens), `uni` takes single-channel windows of `L`
//! samples (`C·⌈T/L⌉` tokens) and `whole` takes one token per time point
//! (`T` tokens). The encoder downstream is identical. All math is `f64` and
//! the backward pass is analytic, verified by [`grad_check`].

mod config;
mod gradcheck;
mod model;
mod train;

pub use config::{PatchConfig, Strategy};
pub use gradcheck::{
    grad_check, gradcheck_case, gradcheck_config, GradCheckReport, TensorCheck, FD_STEP, REL_FLOOR,
};
pub use model::{EncoderCache, Params, PatchModel, TokenTensor, LN_EPS};
pub use train::{evaluate_strategy, predict_proba_all, train_patch_model, PatchRun};
