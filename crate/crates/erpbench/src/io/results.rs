//! Experiment configs and result files.

use std::fs;
use std::path::{Path, PathBuf};

use erpbench_core::harness::{Aggregate, BenchConfig, RunResult};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{io_err, json_err, Result};

/// A benchmark run over one or more ERPB datasets. Relative dataset paths
/// resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    #[serde(flatten)]
    pub bench: BenchConfig,
}

impl ExperimentConfig {
    pub fn resolve(mut self, base: &Path) -> Self {
        for d in &mut self.datasets {
            if d.is_relative() {
                *d = base.join(&*d);
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultsFile {
    pub runs: Vec<RunResult>,
    pub aggregate: Vec<Aggregate>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}
