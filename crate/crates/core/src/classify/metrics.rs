//! Accuracy, macro F1 and tie-aware AUROC.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub auroc: f64,
}

/// Row argmax; ties go to the lowest index.
pub fn argmax_rows(probs: &[f64], n_classes: usize) -> Vec<usize> {
    probs
        .chunks_exact(n_classes)
        .map(|row| {
            let mut best = 0;
            for (k, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

pub fn accuracy(pred: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    pred.iter().zip(labels).filter(|(p, l)| p == l).count() as f64 / labels.len() as f64
}

/// Unweighted mean of per-class F1 over classes that occur in the labels or
/// the predictions.
pub fn macro_f1(pred: &[usize], labels: &[usize]) -> f64 {
    let k = pred.iter().chain(labels).map(|c| c + 1).max().unwrap_or(0);
    let (mut tp, mut fp, mut fn_) = (vec![0usize; k], vec![0usize; k], vec![0usize; k]);
    for (&p, &l) in pred.iter().zip(labels) {
        if p == l {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[l] += 1;
        }
    }
    let mut sum = 0.0;
    let mut n = 0;
    for c in 0..k {
        let support = tp[c] + fp[c] + fn_[c];
        if support == 0 {
            continue;
        }
        n += 1;
        sum += 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Ranks starting at 1, tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Mann-Whitney AUROC of `scores` for the positives; ties count half.
pub fn binary_auroc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        bail!(
            Shape,
            "{} scores for {} labels",
            scores.len(),
            positive.len()
        );
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        bail!(Metric, "AUROC needs both positives and negatives");
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(positive)
        .filter(|(_, &p)| p)
        .map(|(r, _)| r)
        .sum();
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// One-vs-rest macro AUROC; the binary case scores class 1.
pub fn auroc(probs: &[f64], n_classes: usize, labels: &[usize]) -> Result<f64> {
    if n_classes == 2 {
        let scores: Vec<f64> = probs.chunks_exact(2).map(|r| r[1]).collect();
        let pos: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
        return binary_auroc(&scores, &pos);
    }
    let mut sum = 0.0;
    let mut n = 0;
    for c in 0..n_classes {
        let pos: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        if pos.iter().all(|&p| p) || !pos.iter().any(|&p| p) {
            continue;
        }
        let scores: Vec<f64> = probs.chunks_exact(n_classes).map(|r| r[c]).collect();
        sum += binary_auroc(&scores, &pos)?;
        n += 1;
    }
    if n == 0 {
        bail!(Metric, "no class has both positives and negatives");
    }
    Ok(sum / n as f64)
}

/// `probs` is row-major `[labels.len() × n_classes]`.
pub fn compute_metrics(probs: &[f64], n_classes: usize, labels: &[usize]) -> Result<MetricSet> {
    if n_classes < 2 || probs.len() != labels.len() * n_classes {
        bail!(
            Shape,
            "{} probabilities for {} labels and {} classes",
            probs.len(),
            labels.len(),
            n_classes
        );
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        bail!(Shape, "label {l} out of range for {n_classes} classes");
    }
    let first = labels.first().copied();
    if labels.iter().all(|&l| Some(l) == first) {
        bail!(Metric, "labels contain a single class");
    }
    let pred = argmax_rows(probs, n_classes);
    Ok(MetricSet {
        accuracy: accuracy(&pred, labels),
        f1_macro: macro_f1(&pred, labels),
        auroc: auroc(probs, n_classes, labels)?,
    })
}
