//! File formats, parallel drivers and the `erpbench` command-line tool on
//! top of [`erpbench_core`].
//!
//! On-disk formats:
//!
//! * **ERPB** trial datasets: a directory with `manifest.json` and
//!   `trials.bin` (little-endian `f32`, channel-major per trial).
//! * **Tensor files** for feature matrices and model checkpoints: an 8-byte
//!   magic, a little-endian `u64` header length, a JSON header and a
//!   little-endian `f32` payload.
//! * **Recordings** fed to `preprocess`: a JSON manifest per recording next
//!   to its `f32` sample file.
//! * JSON for experiment configs, split plans and results.

pub mod cli;
pub mod io;
pub mod parallel;

pub use io::{Error, Result};
