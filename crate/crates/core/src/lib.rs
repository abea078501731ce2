//! Allocation-only building blocks for event-related potential benchmarks.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function over in-memory data: preprocessing of continuous recordings into
//! normalized trials, Welch spectra, the two handcrafted feature catalogs
//! (`eeg31`, `erp91`), a softmax-regression classifier with the evaluation
//! metrics, the subject-independent evaluation protocol with rank
//! aggregation, and a small single-block Transformer used to compare patch
//! embedding strategies.
//!
//! ```text
//! Recording ─ notch/band-pass ─ interpolate ─ re-reference ─ resample
//!     └─ epoch + baseline ─ (reject) ─ z-score ─▶ TrialSet
//! TrialSet ─ features::extract ─▶ FeatureMatrix ─ classify::train_linear ─▶ LinearModel
//! ```
//!
//! File formats, configuration parsing and the command-line tool live in the
//! `erpbench` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classify;
mod error;
pub mod features;
pub mod fft;
pub mod harness;
mod linalg;
pub mod patchlab;
pub mod rng;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
