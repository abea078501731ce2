//! ERPB trial datasets.

use std::fs;
use std::io::Write;
use std::path::Path;

use erpbench_core::signal::TrialSet;
use serde::{Deserialize, Serialize};

use super::{f32_bytes, f32_values, format_err, io_err, json_err, Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATA_FILE: &str = "trials.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub subject_id: String,
    pub class_index: usize,
    pub byte_offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErpbManifest {
    pub format_version: u32,
    pub dataset_name: String,
    pub fs: f64,
    pub channel_labels: Vec<String>,
    pub class_names: Vec<String>,
    pub n_samples: usize,
    pub trials: Vec<TrialEntry>,
}

impl ErpbManifest {
    pub fn record_bytes(&self) -> u64 {
        (self.channel_labels.len() * self.n_samples * 4) as u64
    }

    pub fn data_bytes(&self) -> u64 {
        self.record_bytes() * self.trials.len() as u64
    }

    fn check(&self, path: &Path) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                path: path.to_path_buf(),
                found: self.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let rec = self.record_bytes();
        for (i, t) in self.trials.iter().enumerate() {
            if t.byte_offset != i as u64 * rec {
                return Err(format_err(
                    path,
                    format!(
                        "trial {i} at byte {} breaks the record layout",
                        t.byte_offset
                    ),
                ));
            }
            if t.class_index >= self.class_names.len() {
                return Err(format_err(
                    path,
                    format!(
                        "trial {i} has class {} of {}",
                        t.class_index,
                        self.class_names.len()
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Writes `manifest.json` and `trials.bin` into `dir`, creating it if needed.
/// Samples are stored as `f32`.
pub fn write_erpb(ts: &TrialSet, dataset_name: &str, dir: &Path) -> Result<ErpbManifest> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let record = (ts.n_channels() * ts.n_samples() * 4) as u64;
    let manifest = ErpbManifest {
        format_version: FORMAT_VERSION,
        dataset_name: dataset_name.to_string(),
        fs: ts.fs(),
        channel_labels: ts.channel_labels().to_vec(),
        class_names: ts.class_names().to_vec(),
        n_samples: ts.n_samples(),
        trials: ts
            .labels()
            .iter()
            .zip(ts.subject_ids())
            .enumerate()
            .map(|(i, (&class_index, s))| TrialEntry {
                subject_id: s.clone(),
                class_index,
                byte_offset: i as u64 * record,
            })
            .collect(),
    };
    let data_path = dir.join(DATA_FILE);
    let mut f = std::io::BufWriter::new(fs::File::create(&data_path).map_err(io_err(&data_path))?);
    for t in 0..ts.n_trials() {
        f.write_all(&f32_bytes(ts.trial(t).iter().copied()))
            .map_err(io_err(&data_path))?;
    }
    f.flush().map_err(io_err(&data_path))?;
    let man_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(json_err(&man_path))?;
    fs::write(&man_path, text + "\n").map_err(io_err(&man_path))?;
    Ok(manifest)
}

pub fn read_erpb_manifest(dir: &Path) -> Result<ErpbManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: ErpbManifest = serde_json::from_str(&text).map_err(json_err(&path))?;
    manifest.check(&path)?;
    Ok(manifest)
}

pub fn read_erpb(dir: &Path) -> Result<(ErpbManifest, TrialSet)> {
    let manifest = read_erpb_manifest(dir)?;
    let path = dir.join(DATA_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    if bytes.len() as u64 != manifest.data_bytes() {
        return Err(Error::Corrupt {
            path,
            expected: manifest.data_bytes(),
            actual: bytes.len() as u64,
        });
    }
    let n_channels = manifest.channel_labels.len();
    let ts = if manifest.trials.is_empty() {
        TrialSet::empty(
            n_channels,
            manifest.n_samples,
            manifest.fs,
            manifest.class_names.clone(),
            manifest.channel_labels.clone(),
        )
    } else {
        TrialSet::new(
            f32_values(&bytes),
            n_channels,
            manifest.n_samples,
            manifest.trials.iter().map(|t| t.class_index).collect(),
            manifest
                .trials
                .iter()
                .map(|t| t.subject_id.clone())
                .collect(),
            manifest.fs,
            manifest.class_names.clone(),
            manifest.channel_labels.clone(),
        )?
    };
    Ok((manifest, ts))
}
