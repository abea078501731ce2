use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{round_half_up, Recording, TrialSet};
use crate::error::bail;
use crate::Result;

/// Trial window and baseline sub-window, in seconds relative to the event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochSpec {
    pub window: (f64, f64),
    pub baseline: (f64, f64),
}

impl EpochSpec {
    pub fn new(window: (f64, f64), baseline: (f64, f64)) -> Result<Self> {
        let spec = Self { window, baseline };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.window;
        let (b0, b1) = self.baseline;
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            bail!(Argument, "epoch window [{t0}, {t1}] is empty");
        }
        if !(b0.is_finite() && b1.is_finite() && b0 < b1) {
            bail!(Argument, "baseline window [{b0}, {b1}] is empty");
        }
        if b0 < t0 || b1 > t1 {
            bail!(
                Argument,
                "baseline [{b0}, {b1}] lies outside epoch [{t0}, {t1}]"
            );
        }
        Ok(())
    }

    /// Trial length in samples at `fs`.
    pub fn n_samples(&self, fs: f64) -> usize {
        round_half_up((self.window.1 - self.window.0) * fs).max(0) as usize
    }

    /// Baseline as a half-open sample range within the trial.
    pub fn baseline_range(&self, fs: f64) -> (usize, usize) {
        let len = self.n_samples(fs) as i64;
        let lo = round_half_up((self.baseline.0 - self.window.0) * fs).clamp(0, len);
        let hi = round_half_up((self.baseline.1 - self.window.0) * fs).clamp(0, len);
        (lo as usize, hi as usize)
    }
}

/// Event label to class index, with the class names in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    class_names: Vec<String>,
    map: BTreeMap<String, usize>,
}

impl LabelMap {
    /// Each class name is also the event label that maps to it.
    pub fn from_classes<S: AsRef<str>>(classes: &[S]) -> Self {
        let class_names: Vec<String> = classes.iter().map(|s| s.as_ref().to_string()).collect();
        let map = class_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self { class_names, map }
    }

    /// Several event labels may share a class.
    pub fn new(class_names: Vec<String>, map: BTreeMap<String, usize>) -> Result<Self> {
        if let Some((label, &idx)) = map.iter().find(|(_, &i)| i >= class_names.len()) {
            bail!(
                Argument,
                "label '{label}' maps to class {idx}, but only {} classes exist",
                class_names.len()
            );
        }
        Ok(Self { class_names, map })
    }

    pub fn class_of(&self, label: &str) -> Option<usize> {
        self.map.get(label).copied()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }
}

/// Epoching result with the bookkeeping for every input event.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutcome {
    pub trials: TrialSet,
    /// Mapped events whose window leaves the recording.
    pub boundary_skips: usize,
    /// Events whose label is not in the label map.
    pub unmapped: usize,
}

/// Cuts one baseline-corrected trial per mapped event fully inside `rec`.
pub fn epoch_and_baseline(
    rec: &Recording,
    spec: &EpochSpec,
    labels: &LabelMap,
) -> Result<EpochOutcome> {
    spec.validate()?;
    let fs = rec.fs();
    let len = spec.n_samples(fs);
    let (b_lo, b_hi) = spec.baseline_range(fs);
    if len == 0 || b_hi <= b_lo {
        bail!(
            Argument,
            "epoch or baseline shorter than one sample at {fs} Hz"
        );
    }
    let offset = round_half_up(spec.window.0 * fs);
    let n = rec.n_samples() as i64;
    let c = rec.n_channels();

    let mut data = Vec::new();
    let mut classes = Vec::new();
    let mut boundary_skips = 0;
    let mut unmapped = 0;
    for ev in rec.events() {
        let Some(class) = labels.class_of(&ev.label) else {
            unmapped += 1;
            continue;
        };
        let start = ev.sample_index as i64 + offset;
        if start < 0 || start + len as i64 > n {
            boundary_skips += 1;
            continue;
        }
        let start = start as usize;
        for ch in 0..c {
            let seg = &rec.channel(ch)[start..start + len];
            let base = seg[b_lo..b_hi].iter().sum::<f64>() / (b_hi - b_lo) as f64;
            data.extend(seg.iter().map(|v| v - base));
        }
        classes.push(class);
    }
    if classes.is_empty() {
        bail!(
            Empty,
            "no mapped event fits inside the recording ({} events, {unmapped} unmapped, {boundary_skips} at the edges)",
            rec.events().len()
        );
    }
    let subjects = alloc::vec![rec.subject_id().to_string(); classes.len()];
    let trials = TrialSet::new(
        data,
        c,
        len,
        classes,
        subjects,
        fs,
        labels.class_names().to_vec(),
        rec.channel_labels().to_vec(),
    )?;
    Ok(EpochOutcome {
        trials,
        boundary_skips,
        unmapped,
    })
}
