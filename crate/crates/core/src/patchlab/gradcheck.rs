//! Central finite-difference verification of the analytic gradients.

use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{PatchConfig, Strategy};
use super::model::{Params, PatchModel};
use crate::Result;

pub const FD_STEP: f64 = 1e-5;
/// Relative errors divide by `max(|analytic|, |numeric|, REL_FLOOR)`, so
/// entries whose true gradient is essentially zero are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCheck {
    pub name: String,
    pub checked: usize,
    pub max_rel_err: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub tensors: Vec<TensorCheck>,
    pub max_rel_err: f64,
    pub passed: bool,
}

/// Compares up to `entries_per_tensor` seeded entries of every tensor; a
/// tensor passes when its worst relative error is strictly below
/// `tolerance`.
pub fn grad_check(
    model: &PatchModel,
    batch: &[(&[f64], usize)],
    tolerance: f64,
    entries_per_tensor: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, analytic) = model.loss_and_grad(batch)?;
    let mut probe = model.clone();
    let mut rng = crate::rng::stream(seed, &["gradcheck", "entries"]);
    let mut tensors = Vec::with_capacity(Params::NAMES.len());
    for (t, name) in Params::NAMES.iter().enumerate() {
        let len = analytic.tensors()[t].len();
        let picks: Vec<usize> = if len <= entries_per_tensor {
            (0..len).collect()
        } else {
            sample(&mut rng, len, entries_per_tensor).into_vec()
        };
        let mut worst: f64 = 0.0;
        for &i in &picks {
            let orig = probe.params.tensors()[t][i];
            probe.params.tensors_mut()[t][i] = orig + FD_STEP;
            let up = probe.loss(batch)?;
            probe.params.tensors_mut()[t][i] = orig - FD_STEP;
            let down = probe.loss(batch)?;
            probe.params.tensors_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic.tensors()[t][i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            worst = worst.max(rel);
        }
        tensors.push(TensorCheck {
            name: String::from(*name),
            checked: picks.len(),
            max_rel_err: worst,
            passed: worst < tolerance,
        });
    }
    let max_rel_err = tensors.iter().map(|t| t.max_rel_err).fold(0.0, f64::max);
    let passed = tensors.iter().all(|t| t.passed);
    Ok(GradCheckReport {
        tolerance,
        tensors,
        max_rel_err,
        passed,
    })
}

/// Small seeded configuration for `strategy`: 16 samples, 3 channels,
/// patch length 4, width 8, three classes.
pub fn gradcheck_config(strategy: Strategy) -> PatchConfig {
    PatchConfig {
        strategy,
        patch_len: 4,
        d_model: 8,
        ff_dim: 12,
        n_heads: 1,
        n_samples: 16,
        n_channels: 3,
        n_classes: 3,
    }
}

/// Seeded model and 4-trial batch for `strategy`, checked at `tolerance`.
pub fn gradcheck_case(strategy: Strategy, seed: u64, tolerance: f64) -> Result<GradCheckReport> {
    let cfg = gradcheck_config(strategy);
    let model = PatchModel::init(&cfg, seed)?;
    let mut rng = crate::rng::stream(seed, &["gradcheck", "batch"]);
    let trials: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            (0..cfg.n_samples * cfg.n_channels)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();
    let batch: Vec<(&[f64], usize)> = trials
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), i % cfg.n_classes))
        .collect();
    grad_check(&model, &batch, tolerance, 16, seed)
}
