//! Continuous recordings: a JSON manifest beside a channel-major `f32` file.

use std::fs;
use std::path::{Path, PathBuf};

use erpbench_core::signal::{EventMarker, Recording};
use serde::{Deserialize, Serialize};

use super::{f32_bytes, f32_values, format_err, io_err, json_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingManifest {
    pub subject_id: String,
    pub fs: f64,
    pub channel_labels: Vec<String>,
    /// Labels of channels dropped before processing (EOG, ECG, triggers).
    #[serde(default)]
    pub non_eeg_channels: Vec<String>,
    /// Labels of channels to interpolate from their neighbours.
    #[serde(default)]
    pub bad_channels: Vec<String>,
    pub events: Vec<EventMarker>,
    pub n_samples: usize,
    /// Sample file, relative to the manifest.
    pub data_file: PathBuf,
}

/// Writes `path` (the manifest) and a `.f32` sample file next to it.
pub fn write_recording(
    path: &Path,
    rec: &Recording,
    non_eeg: &[String],
    bad: &[String],
) -> Result<RecordingManifest> {
    let stem = path
        .file_stem()
        .ok_or_else(|| format_err(path, "manifest path has no file name"))?;
    let data_file = PathBuf::from(stem).with_extension("f32");
    let manifest = RecordingManifest {
        subject_id: rec.subject_id().into(),
        fs: rec.fs(),
        channel_labels: rec.channel_labels().to_vec(),
        non_eeg_channels: non_eeg.to_vec(),
        bad_channels: bad.to_vec(),
        events: rec.events().to_vec(),
        n_samples: rec.n_samples(),
        data_file: data_file.clone(),
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let data_path = dir.join(&data_file);
    fs::write(&data_path, f32_bytes(rec.data().iter().flatten().copied()))
        .map_err(io_err(&data_path))?;
    let text = serde_json::to_string_pretty(&manifest).map_err(json_err(path))?;
    fs::write(path, text).map_err(io_err(path))?;
    Ok(manifest)
}

pub fn read_recording(path: &Path) -> Result<(RecordingManifest, Recording)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let m: RecordingManifest = serde_json::from_str(&text).map_err(json_err(path))?;
    let data_path = path.parent().unwrap_or(Path::new(".")).join(&m.data_file);
    let bytes = fs::read(&data_path).map_err(io_err(&data_path))?;
    let expected = (m.channel_labels.len() * m.n_samples * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Corrupt {
            path: data_path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let values = f32_values(&bytes);
    let data = if m.n_samples == 0 {
        vec![Vec::new(); m.channel_labels.len()]
    } else {
        values
            .chunks_exact(m.n_samples)
            .map(<[f64]>::to_vec)
            .collect()
    };
    let rec = Recording::new(
        data,
        m.fs,
        m.channel_labels.clone(),
        m.events.clone(),
        m.subject_id.clone(),
    )?;
    Ok((m, rec))
}

/// Every `*.json` manifest in `dir`, in file-name order.
pub fn read_recordings(dir: &Path) -> Result<Vec<(RecordingManifest, Recording)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(format_err(dir, "no recording manifests found"));
    }
    paths.iter().map(|p| read_recording(p)).collect()
}
