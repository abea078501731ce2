//! Softmax regression over standardized features.

use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{argmax_rows, macro_f1};
use super::optim::{cosine_lr, AdamW};
use crate::error::bail;
use crate::features::FeatureMatrix;
use crate::Result;

/// Standard deviations below this are replaced by 1 when standardizing.
pub const STANDARDIZE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            max_epochs: 200,
            patience: 15,
            lr: 1e-4,
            weight_decay: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            bail!(Argument, "batch size, epochs and patience must be positive");
        }
        if self.patience > self.max_epochs {
            bail!(
                Argument,
                "patience {} exceeds max epochs {}",
                self.patience,
                self.max_epochs
            );
        }
        if !(self.lr > 0.0 && self.lr.is_finite())
            || !(self.weight_decay >= 0.0 && self.weight_decay.is_finite())
        {
            bail!(
                Argument,
                "learning rate must be positive and weight decay non-negative"
            );
        }
        Ok(())
    }
}

/// `weights` is row-major `[n_features × n_classes]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        Self {
            weights: vec![0.0; n_features * n_classes],
            bias: vec![0.0; n_classes],
            feature_mean: vec![0.0; n_features],
            feature_std: vec![1.0; n_features],
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_mean.len()
    }
    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (f, k) = (self.n_features(), self.n_classes());
        if k < 2 || self.weights.len() != f * k || self.feature_std.len() != f {
            bail!(Shape, "inconsistent model tensors");
        }
        let all = self
            .weights
            .iter()
            .chain(&self.bias)
            .chain(&self.feature_mean)
            .chain(&self.feature_std);
        if all.clone().any(|v| !v.is_finite()) || self.feature_std.iter().any(|s| *s <= 0.0) {
            bail!(Data, "model parameters must be finite with positive scales");
        }
        Ok(())
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        let k = self.n_classes();
        for (j, &v) in x.iter().enumerate() {
            let z = (v - self.feature_mean[j]) / self.feature_std[j];
            if z != 0.0 {
                for (o, w) in out.iter_mut().zip(&self.weights[j * k..(j + 1) * k]) {
                    *o += z * w;
                }
            }
        }
    }

    /// Row-major `[n_rows × n_classes]` class probabilities.
    pub fn predict_proba(&self, feats: &FeatureMatrix) -> Result<Vec<f64>> {
        if feats.n_cols() != self.n_features() {
            bail!(
                Shape,
                "model expects {} features, matrix has {}",
                self.n_features(),
                feats.n_cols()
            );
        }
        let k = self.n_classes();
        let mut out = vec![0.0; feats.n_rows() * k];
        for (i, row) in out.chunks_exact_mut(k).enumerate() {
            self.logits_into(feats.row(i), row);
            softmax_in_place(row);
        }
        Ok(out)
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = libm::exp(*v - m);
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_valid_f1: f64,
    pub initial_train_loss: f64,
    pub final_train_loss: f64,
}

fn mean_cross_entropy(model: &LinearModel, feats: &FeatureMatrix) -> f64 {
    let k = model.n_classes();
    let mut z = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..feats.n_rows() {
        model.logits_into(feats.row(i), &mut z);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + libm::log(z.iter().map(|v| libm::exp(v - m)).sum::<f64>());
        total += lse - z[feats.labels()[i]];
    }
    total / feats.n_rows().max(1) as f64
}

fn standardization(train: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (train.n_rows() as f64, train.n_cols());
    let mut mean = vec![0.0; d];
    for i in 0..train.n_rows() {
        for (m, v) in mean.iter_mut().zip(train.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for i in 0..train.n_rows() {
        for ((s, v), m) in var.iter_mut().zip(train.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = libm::sqrt(s / n);
            if sd > STANDARDIZE_EPS {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

pub fn train_linear(
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    fit_linear(train, valid, cfg).map(|(m, _)| m)
}

/// Minibatch softmax regression with early stopping on validation macro F1;
/// returns the best checkpoint.
pub fn fit_linear(
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    if train.n_cols() != valid.n_cols() {
        bail!(
            Shape,
            "train has {} features, validation {}",
            train.n_cols(),
            valid.n_cols()
        );
    }
    if valid.n_rows() == 0 {
        return Err(crate::Error::Empty("validation split has no trials".into()));
    }
    let first = train.labels().first().copied();
    if train.labels().iter().all(|&l| Some(l) == first) {
        bail!(Degenerate, "training split contains fewer than two classes");
    }
    let d = train.n_cols();
    let k = train.n_classes().max(valid.n_classes()).max(2);
    let (feature_mean, feature_std) = standardization(train);

    // the objective is convex, so training starts from zero and the seed
    // only drives minibatch order
    let mut model = LinearModel {
        weights: vec![0.0; d * k],
        bias: vec![0.0; k],
        feature_mean,
        feature_std,
    };

    // standardized training features, computed once
    let n = train.n_rows();
    let mut xs = vec![0.0; n * d];
    for i in 0..n {
        for (j, v) in train.row(i).iter().enumerate() {
            xs[i * d + j] = (v - model.feature_mean[j]) / model.feature_std[j];
        }
    }
    let labels = train.labels();

    let initial_train_loss = mean_cross_entropy(&model, train);
    let mut opt = AdamW::new(&[d * k, k], cfg.weight_decay);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle = crate::rng::stream(cfg.seed, &["linear", "shuffle"]);
    let (mut gw, mut gb) = (vec![0.0; d * k], vec![0.0; k]);
    let mut z = vec![0.0; k];

    let mut best = (model.clone(), f64::NEG_INFINITY, 0usize);
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 0..cfg.max_epochs {
        let lr = cosine_lr(cfg.lr, epoch, cfg.max_epochs);
        order.shuffle(&mut shuffle);
        for batch in order.chunks(cfg.batch_size) {
            gw.iter_mut().for_each(|g| *g = 0.0);
            gb.iter_mut().for_each(|g| *g = 0.0);
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = &xs[i * d..(i + 1) * d];
                z.copy_from_slice(&model.bias);
                for (j, &v) in x.iter().enumerate() {
                    for (o, w) in z.iter_mut().zip(&model.weights[j * k..(j + 1) * k]) {
                        *o += v * w;
                    }
                }
                softmax_in_place(&mut z);
                z[labels[i]] -= 1.0;
                for (b, g) in gb.iter_mut().zip(&z) {
                    *b += g * inv;
                }
                for (j, &v) in x.iter().enumerate() {
                    for (w, g) in gw[j * k..(j + 1) * k].iter_mut().zip(&z) {
                        *w += v * g * inv;
                    }
                }
            }
            opt.tick();
            opt.update(0, &mut model.weights, &gw, lr);
            opt.update(1, &mut model.bias, &gb, lr);
        }
        epochs_run = epoch + 1;
        let probs = model.predict_proba(valid)?;
        let f1 = macro_f1(&argmax_rows(&probs, k), valid.labels());
        if f1 > best.1 {
            best = (model.clone(), f1, epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let (model, best_valid_f1, best_epoch) = best;
    let final_train_loss = mean_cross_entropy(&model, train);
    Ok((
        model,
        TrainReport {
            epochs_run,
            best_epoch,
            best_valid_f1,
            initial_train_loss,
            final_train_loss,
        },
    ))
}
