//! Continuous-recording preprocessing: filtering, spatial operations,
//! resampling, epoching with baseline correction, trial rejection and
//! per-trial normalization.
//!
//! Every operation is a pure function returning a new value. Channels and
//! trials are independent, so callers are free to fan work out.

mod epoch;
mod filter;
mod normalize;
mod pipeline;
mod resample;
mod spatial;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::Result;

pub use epoch::{epoch_and_baseline, EpochOutcome, EpochSpec, LabelMap};
pub use filter::{
    apply_zero_phase, bandpass_filter, butterworth_highpass, butterworth_lowpass, notch_design,
    notch_filter, Biquad, SosFilter, BANDPASS_ORDER, NOTCH_Q,
};
pub use normalize::{amplitude_reject, zscore_trials, ZSCORE_EPS};
pub use pipeline::{eeg_channel_mask, preprocess, PreprocessOutcome, PreprocessSpec};
pub use resample::{resample, resampled_len};
pub use spatial::{average_reref, interpolate_channels};

/// Stimulus event at a sample offset into a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMarker {
    pub sample_index: usize,
    pub label: String,
}

/// Continuous multichannel signal in microvolts, one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    data: Vec<Vec<f64>>,
    fs: f64,
    channel_labels: Vec<String>,
    events: Vec<EventMarker>,
    subject_id: String,
}

impl Recording {
    pub fn new(
        data: Vec<Vec<f64>>,
        fs: f64,
        channel_labels: Vec<String>,
        events: Vec<EventMarker>,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            bail!(Argument, "sampling rate must be positive, got {fs}");
        }
        if data.is_empty() {
            bail!(Data, "recording has no channels");
        }
        if channel_labels.len() != data.len() {
            bail!(
                Shape,
                "{} channel labels for {} channels",
                channel_labels.len(),
                data.len()
            );
        }
        let n = data[0].len();
        if data.iter().any(|row| row.len() != n) {
            bail!(Shape, "channels have unequal lengths");
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            bail!(Data, "recording contains non-finite samples");
        }
        if let Some(ev) = events.iter().find(|e| e.sample_index >= n) {
            bail!(
                Argument,
                "event '{}' at sample {} is past the end ({n} samples)",
                ev.label,
                ev.sample_index
            );
        }
        Ok(Self {
            data,
            fs,
            channel_labels,
            events,
            subject_id: subject_id.into(),
        })
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.data[idx]
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn events(&self) -> &[EventMarker] {
        &self.events
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data[0].len()
    }

    /// Same metadata, new samples. Used by the shape-preserving operations.
    pub(crate) fn with_data(&self, data: Vec<Vec<f64>>) -> Self {
        Self {
            data,
            ..self.clone_meta()
        }
    }

    pub(crate) fn clone_meta(&self) -> Self {
        Self {
            data: Vec::new(),
            fs: self.fs,
            channel_labels: self.channel_labels.clone(),
            events: self.events.clone(),
            subject_id: self.subject_id.clone(),
        }
    }

    /// Keeps only the channels whose index satisfies `keep`.
    pub fn select_channels(&self, mut keep: impl FnMut(usize, &str) -> bool) -> Result<Self> {
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (i, (row, label)) in self.data.iter().zip(&self.channel_labels).enumerate() {
            if keep(i, label) {
                data.push(row.clone());
                labels.push(label.clone());
            }
        }
        if data.is_empty() {
            bail!(Data, "channel selection removed every channel");
        }
        Ok(Self {
            data,
            channel_labels: labels,
            ..self.clone_meta()
        })
    }
}

/// Epoched ERP trials, stored as one flat `[trial][channel][sample]` buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    data: Vec<f64>,
    n_trials: usize,
    n_channels: usize,
    n_samples: usize,
    labels: Vec<usize>,
    subject_ids: Vec<String>,
    fs: f64,
    class_names: Vec<String>,
    channel_labels: Vec<String>,
}

impl TrialSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: Vec<f64>,
        n_channels: usize,
        n_samples: usize,
        labels: Vec<usize>,
        subject_ids: Vec<String>,
        fs: f64,
        class_names: Vec<String>,
        channel_labels: Vec<String>,
    ) -> Result<Self> {
        let n_trials = labels.len();
        if subject_ids.len() != n_trials {
            bail!(
                Shape,
                "{} subject ids for {n_trials} labels",
                subject_ids.len()
            );
        }
        if data.len() != n_trials * n_channels * n_samples {
            bail!(
                Shape,
                "buffer of {} values does not hold {n_trials} x {n_channels} x {n_samples}",
                data.len()
            );
        }
        if channel_labels.len() != n_channels {
            bail!(
                Shape,
                "{} channel labels for {n_channels} channels",
                channel_labels.len()
            );
        }
        if !(fs.is_finite() && fs > 0.0) {
            bail!(Argument, "sampling rate must be positive, got {fs}");
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            bail!(
                Argument,
                "class index {bad} out of range for {} classes",
                class_names.len()
            );
        }
        if data.iter().any(|v| !v.is_finite()) {
            bail!(Data, "trial data contains non-finite values");
        }
        Ok(Self {
            data,
            n_trials,
            n_channels,
            n_samples,
            labels,
            subject_ids,
            fs,
            class_names,
            channel_labels,
        })
    }

    /// An empty set with the given geometry.
    pub fn empty(
        n_channels: usize,
        n_samples: usize,
        fs: f64,
        class_names: Vec<String>,
        channel_labels: Vec<String>,
    ) -> Self {
        Self {
            data: Vec::new(),
            n_trials: 0,
            n_channels,
            n_samples,
            labels: Vec::new(),
            subject_ids: Vec::new(),
            fs,
            class_names,
            channel_labels,
        }
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }
    pub fn n_channels(&self) -> usize {
        self.n_channels
    }
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
    pub fn fs(&self) -> f64 {
        self.fs
    }
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }
    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.n_trials == 0
    }

    /// `[channel][sample]` block of one trial.
    pub fn trial(&self, t: usize) -> &[f64] {
        let len = self.n_channels * self.n_samples;
        &self.data[t * len..(t + 1) * len]
    }

    pub fn row(&self, t: usize, c: usize) -> &[f64] {
        let start = (t * self.n_channels + c) * self.n_samples;
        &self.data[start..start + self.n_samples]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_samples.max(1))
    }

    /// Distinct subject ids in first-appearance order.
    pub fn subjects(&self) -> Vec<String> {
        let mut seen = alloc::collections::BTreeSet::new();
        self.subject_ids
            .iter()
            .filter(|s| seen.insert(s.as_str()))
            .cloned()
            .collect()
    }

    /// Trials whose index satisfies `keep`, in original order.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let len = self.n_channels * self.n_samples;
        let mut out = self.empty_like();
        for t in 0..self.n_trials {
            if keep(t) {
                out.data
                    .extend_from_slice(&self.data[t * len..(t + 1) * len]);
                out.labels.push(self.labels[t]);
                out.subject_ids.push(self.subject_ids[t].clone());
                out.n_trials += 1;
            }
        }
        out
    }

    /// Trials belonging to any of `subjects`.
    pub fn select_subjects<S: AsRef<str>>(&self, subjects: &[S]) -> Self {
        let wanted: alloc::collections::BTreeSet<&str> =
            subjects.iter().map(|s| s.as_ref()).collect();
        let ids = &self.subject_ids;
        self.filter(|t| wanted.contains(ids[t].as_str()))
    }

    pub fn empty_like(&self) -> Self {
        Self::empty(
            self.n_channels,
            self.n_samples,
            self.fs,
            self.class_names.clone(),
            self.channel_labels.clone(),
        )
    }

    /// Same trials and metadata, replaced labels.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_trials {
            bail!(
                Shape,
                "{} labels for {} trials",
                labels.len(),
                self.n_trials
            );
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.class_names.len()) {
            bail!(Argument, "class index {bad} out of range");
        }
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            data,
            ..self.clone_shallow_meta()
        }
    }

    fn clone_shallow_meta(&self) -> Self {
        Self {
            data: Vec::new(),
            labels: self.labels.clone(),
            subject_ids: self.subject_ids.clone(),
            class_names: self.class_names.clone(),
            channel_labels: self.channel_labels.clone(),
            ..*self
        }
    }

    /// Appends every trial of `other`. Geometry, rate and class names must agree.
    pub fn extend(&mut self, other: &TrialSet) -> Result<()> {
        if other.n_channels != self.n_channels || other.n_samples != self.n_samples {
            bail!(
                Shape,
                "cannot append {}x{} trials to a {}x{} set",
                other.n_channels,
                other.n_samples,
                self.n_channels,
                self.n_samples
            );
        }
        if (other.fs - self.fs).abs() > 1e-9 {
            bail!(
                Argument,
                "sampling rates differ: {} vs {}",
                other.fs,
                self.fs
            );
        }
        if other.class_names != self.class_names {
            bail!(Argument, "class names differ");
        }
        self.data.extend_from_slice(&other.data);
        self.labels.extend_from_slice(&other.labels);
        self.subject_ids.extend(other.subject_ids.iter().cloned());
        self.n_trials += other.n_trials;
        Ok(())
    }
}

/// Round-half-up to the nearest integer.
pub(crate) fn round_half_up(x: f64) -> i64 {
    libm::floor(x + 0.5) as i64
}
