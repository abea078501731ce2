//! Magic + JSON header + `f32` payload files for feature matrices and
//! model checkpoints.

use std::fs;
use std::path::Path;

use erpbench_core::classify::LinearModel;
use erpbench_core::features::{FeatureLayout, FeatureMatrix};
use erpbench_core::patchlab::{Params, PatchConfig, PatchModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{f32_bytes, f32_values, format_err, io_err, json_err, Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"ERPBFEAT";
pub const MODEL_MAGIC: &[u8; 8] = b"ERPBMODL";

fn write_file<H: Serialize>(
    path: &Path,
    magic: &[u8; 8],
    header: &H,
    payload: impl IntoIterator<Item = f64>,
) -> Result<()> {
    let head = serde_json::to_vec(header).map_err(json_err(path))?;
    let mut bytes = Vec::with_capacity(16 + head.len());
    bytes.extend_from_slice(magic);
    bytes.extend_from_slice(&(head.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&head);
    bytes.extend(f32_bytes(payload));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

fn read_file<H: DeserializeOwned>(
    path: &Path,
    magic: &[u8; 8],
    payload_len: impl Fn(&H) -> usize,
) -> Result<(H, Vec<f64>)> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(format_err(
            path,
            format!("not a {} file", String::from_utf8_lossy(magic)),
        ));
    }
    let head_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = 16usize
        .checked_add(head_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| format_err(path, "header runs past end of file"))?;
    let header: H = serde_json::from_slice(&bytes[16..body]).map_err(json_err(path))?;
    let expected = payload_len(&header) as u64 * 4;
    let actual = (bytes.len() - body) as u64;
    if expected != actual {
        return Err(Error::Corrupt {
            path: path.to_path_buf(),
            expected: expected + body as u64,
            actual: bytes.len() as u64,
        });
    }
    Ok((header, f32_values(&bytes[body..])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHeader {
    pub n_rows: usize,
    pub n_cols: usize,
    pub layout: Option<FeatureLayout>,
    pub class_names: Vec<String>,
    pub channel_labels: Vec<String>,
    pub labels: Vec<usize>,
    pub subject_ids: Vec<String>,
}

pub fn write_features(path: &Path, m: &FeatureMatrix, channel_labels: &[String]) -> Result<()> {
    let header = FeatureHeader {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        layout: m.layout.clone(),
        class_names: m.class_names.clone(),
        channel_labels: channel_labels.to_vec(),
        labels: m.labels().to_vec(),
        subject_ids: m.subject_ids().to_vec(),
    };
    write_file(path, FEATURE_MAGIC, &header, m.values().iter().copied())
}

pub fn read_features(path: &Path) -> Result<(FeatureHeader, FeatureMatrix)> {
    let (h, values) = read_file(path, FEATURE_MAGIC, |h: &FeatureHeader| h.n_rows * h.n_cols)?;
    let mut m = FeatureMatrix::new(
        values,
        h.n_cols,
        h.labels.clone(),
        h.subject_ids.clone(),
        h.class_names.clone(),
    )?;
    if let Some(layout) = &h.layout {
        m = m.with_layout(layout.clone())?;
    }
    Ok((h, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelHeader {
    Linear {
        n_features: usize,
        n_classes: usize,
        class_names: Vec<String>,
        tensors: Vec<TensorEntry>,
    },
    Patch {
        config: PatchConfig,
        tensors: Vec<TensorEntry>,
    },
}

impl ModelHeader {
    fn tensors(&self) -> &[TensorEntry] {
        match self {
            ModelHeader::Linear { tensors, .. } | ModelHeader::Patch { tensors, .. } => tensors,
        }
    }
    fn payload_len(&self) -> usize {
        self.tensors().iter().map(|t| t.len).sum()
    }
}

fn entries<'a>(named: impl IntoIterator<Item = (&'a str, usize)>) -> Vec<TensorEntry> {
    named
        .into_iter()
        .map(|(name, len)| TensorEntry {
            name: name.into(),
            len,
        })
        .collect()
}

fn split_payload(
    path: &Path,
    tensors: &[TensorEntry],
    names: &[&str],
    values: Vec<f64>,
) -> Result<Vec<Vec<f64>>> {
    if tensors.len() != names.len() || tensors.iter().zip(names).any(|(t, n)| t.name != *n) {
        return Err(format_err(path, "unexpected tensor list in model header"));
    }
    let mut out = Vec::with_capacity(tensors.len());
    let mut rest = values.as_slice();
    for t in tensors {
        let (head, tail) = rest.split_at(t.len);
        out.push(head.to_vec());
        rest = tail;
    }
    Ok(out)
}

const LINEAR_TENSORS: [&str; 4] = ["weights", "bias", "feature_mean", "feature_std"];

pub fn write_linear_model(path: &Path, model: &LinearModel, class_names: &[String]) -> Result<()> {
    model.validate()?;
    let tensors = [
        &model.weights,
        &model.bias,
        &model.feature_mean,
        &model.feature_std,
    ];
    let header = ModelHeader::Linear {
        n_features: model.n_features(),
        n_classes: model.n_classes(),
        class_names: class_names.to_vec(),
        tensors: entries(
            LINEAR_TENSORS
                .iter()
                .zip(tensors)
                .map(|(n, t)| (*n, t.len())),
        ),
    };
    write_file(
        path,
        MODEL_MAGIC,
        &header,
        tensors.into_iter().flatten().copied(),
    )
}

/// Model and its class names.
pub fn read_linear_model(path: &Path) -> Result<(LinearModel, Vec<String>)> {
    let (header, values) = read_file(path, MODEL_MAGIC, ModelHeader::payload_len)?;
    let ModelHeader::Linear {
        class_names,
        tensors,
        ..
    } = header
    else {
        return Err(format_err(
            path,
            "checkpoint holds a patch model, not a linear model",
        ));
    };
    let mut parts = split_payload(path, &tensors, &LINEAR_TENSORS, values)?.into_iter();
    let mut next = || parts.next().expect("four tensors");
    let model = LinearModel {
        weights: next(),
        bias: next(),
        feature_mean: next(),
        feature_std: next(),
    };
    model.validate()?;
    Ok((model, class_names))
}

pub fn write_patch_model(path: &Path, model: &PatchModel) -> Result<()> {
    model.validate()?;
    let header = ModelHeader::Patch {
        config: model.cfg.clone(),
        tensors: entries(
            Params::NAMES
                .iter()
                .zip(model.params.tensors())
                .map(|(n, t)| (*n, t.len())),
        ),
    };
    write_file(path, MODEL_MAGIC, &header, model.params.flatten())
}

pub fn read_patch_model(path: &Path) -> Result<PatchModel> {
    let (header, values) = read_file(path, MODEL_MAGIC, ModelHeader::payload_len)?;
    let ModelHeader::Patch { config, tensors } = header else {
        return Err(format_err(
            path,
            "checkpoint holds a linear model, not a patch model",
        ));
    };
    let parts = split_payload(path, &tensors, Params::NAMES, values)?;
    let mut params = Params::zeros(&config);
    for (dst, src) in params.tensors_mut().into_iter().zip(parts) {
        *dst = src;
    }
    let model = PatchModel {
        cfg: config,
        params,
    };
    model.validate()?;
    Ok(model)
}
