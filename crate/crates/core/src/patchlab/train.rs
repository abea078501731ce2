//! Minibatch training of the patch encoder and the three-way comparison.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::{PatchConfig, Strategy};
use super::model::PatchModel;
use crate::classify::{
    argmax_rows, compute_metrics, cosine_lr, macro_f1, AdamW, MetricSet, TrainConfig, TrainReport,
};
use crate::error::bail;
use crate::harness::{monte_carlo_split, SplitRatios};
use crate::signal::TrialSet;
use crate::Result;

fn check_data(cfg: &PatchConfig, ts: &TrialSet) -> Result<()> {
    if ts.n_samples() != cfg.n_samples || ts.n_channels() != cfg.n_channels {
        bail!(
            Shape,
            "trials are {}×{}, model expects {}×{}",
            ts.n_channels(),
            ts.n_samples(),
            cfg.n_channels,
            cfg.n_samples
        );
    }
    if let Some(&l) = ts.labels().iter().find(|&&l| l >= cfg.n_classes) {
        bail!(
            Shape,
            "label {l} out of range for {} classes",
            cfg.n_classes
        );
    }
    Ok(())
}

fn batch_of<'a>(ts: &'a TrialSet, idx: &[usize]) -> Vec<(&'a [f64], usize)> {
    idx.iter().map(|&i| (ts.trial(i), ts.labels()[i])).collect()
}

/// Row-major class probabilities for every trial.
pub fn predict_proba_all(model: &PatchModel, ts: &TrialSet) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ts.n_trials() * model.cfg.n_classes);
    for t in 0..ts.n_trials() {
        out.extend(model.predict_proba(ts.trial(t))?);
    }
    Ok(out)
}

/// Same protocol as the linear classifier: AdamW, cosine schedule, early
/// stopping on validation macro F1, best checkpoint returned.
pub fn train_patch_model(
    train: &TrialSet,
    valid: &TrialSet,
    cfg: &PatchConfig,
    tcfg: &TrainConfig,
) -> Result<(PatchModel, TrainReport)> {
    tcfg.validate()?;
    check_data(cfg, train)?;
    check_data(cfg, valid)?;
    if valid.is_empty() {
        return Err(crate::Error::Empty("validation split has no trials".into()));
    }
    let first = train.labels().first().copied();
    if train.labels().iter().all(|&l| Some(l) == first) {
        bail!(Degenerate, "training split contains fewer than two classes");
    }
    let mut model = PatchModel::init(cfg, tcfg.seed)?;
    let all: Vec<usize> = (0..train.n_trials()).collect();
    let initial_train_loss = model.loss(&batch_of(train, &all))?;
    let mut opt = AdamW::new(&cfg.tensor_sizes(), tcfg.weight_decay);
    let mut order = all.clone();
    let mut shuffle = crate::rng::stream(tcfg.seed, &["patchlab", "shuffle"]);
    let mut best: (PatchModel, f64, usize) = (model.clone(), f64::NEG_INFINITY, 0);
    let (mut stale, mut epochs_run) = (0, 0);
    for epoch in 0..tcfg.max_epochs {
        let lr = cosine_lr(tcfg.lr, epoch, tcfg.max_epochs);
        order.shuffle(&mut shuffle);
        for idx in order.chunks(tcfg.batch_size) {
            let (_, grad) = model.loss_and_grad(&batch_of(train, idx))?;
            opt.tick();
            for (t, (p, g)) in model
                .params
                .tensors_mut()
                .into_iter()
                .zip(grad.tensors())
                .enumerate()
            {
                opt.update(t, p, g, lr);
            }
        }
        epochs_run = epoch + 1;
        let probs = predict_proba_all(&model, valid)?;
        let f1 = macro_f1(&argmax_rows(&probs, cfg.n_classes), valid.labels());
        if f1 > best.1 {
            best = (model.clone(), f1, epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= tcfg.patience {
                break;
            }
        }
    }
    let (model, best_valid_f1, best_epoch) = best;
    let final_train_loss = model.loss(&batch_of(train, &all))?;
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRun {
    pub strategy: Strategy,
    pub patch_len: usize,
    pub n_tokens: usize,
    pub param_count: usize,
    pub seed: u64,
    pub metrics: MetricSet,
}

/// Splits subjects with `seed`, trains one strategy and scores the test
/// subjects.
pub fn evaluate_strategy(
    ts: &TrialSet,
    cfg: &PatchConfig,
    tcfg: &TrainConfig,
    seed: u64,
    ratios: &SplitRatios,
) -> Result<PatchRun> {
    let plan = monte_carlo_split(ts.subject_ids(), seed, ratios)?;
    let (train, valid, test) = (
        ts.select_subjects(&plan.train_subjects),
        ts.select_subjects(&plan.valid_subjects),
        ts.select_subjects(&plan.test_subjects),
    );
    if test.is_empty() {
        bail!(Size, "test split has no trials");
    }
    let tc = TrainConfig {
        seed,
        ..tcfg.clone()
    };
    let (model, _) = train_patch_model(&train, &valid, cfg, &tc)?;
    let metrics = compute_metrics(
        &predict_proba_all(&model, &test)?,
        cfg.n_classes,
        test.labels(),
    )?;
    Ok(PatchRun {
        strategy: cfg.strategy,
        patch_len: cfg.patch_len,
        n_tokens: cfg.n_tokens(),
        param_count: cfg.param_count(),
        seed,
        metrics,
    })
}
