//! Persistence for datasets, features, models, fixtures and results.

mod erpb;
mod fixture;
mod recording;
mod results;
mod tensor_file;

use std::path::{Path, PathBuf};

pub use erpb::{
    read_erpb, read_erpb_manifest, write_erpb, ErpbManifest, TrialEntry, DATA_FILE, FORMAT_VERSION,
    MANIFEST_FILE,
};
pub use fixture::{load_fixture, ScoreTableFixture, FIXTURE_DATASETS, FIXTURE_METHODS};
pub use recording::{read_recording, read_recordings, write_recording, RecordingManifest};
pub use results::{read_json, write_json, ExperimentConfig, ResultsFile};
pub use tensor_file::{
    read_features, read_linear_model, read_patch_model, write_features, write_linear_model,
    write_patch_model, FeatureHeader, FEATURE_MAGIC, MODEL_MAGIC,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: corrupt data file: expected {expected} bytes, found {actual}")]
    Corrupt {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("{path}: unsupported format version {found} (this build reads {supported})")]
    Version {
        path: PathBuf,
        found: u32,
        supported: u32,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("fixture incomplete: {0}")]
    Coverage(String),
    #[error(transparent)]
    Core(#[from] erpbench_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
    move |source| Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub(crate) fn f32_bytes(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values
        .into_iter()
        .flat_map(|v| (v as f32).to_le_bytes())
        .collect()
}

pub(crate) fn f32_values(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect()
}
