//! Patch strategies, tokenization geometry and parameter accounting.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// `L × C` blocks: all channels of `L` consecutive samples.
    Multi,
    /// `L × 1` windows of a single channel.
    Uni,
    /// One token per time point holding all channels.
    Whole,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Multi, Strategy::Uni, Strategy::Whole];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Multi => "multi",
            Strategy::Uni => "uni",
            Strategy::Whole => "whole",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "multi" => Ok(Strategy::Multi),
            "uni" => Ok(Strategy::Uni),
            "whole" => Ok(Strategy::Whole),
            other => bail!(Argument, "unknown patch strategy {other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchConfig {
    pub strategy: Strategy,
    /// Samples per patch; ignored by [`Strategy::Whole`].
    pub patch_len: usize,
    pub d_model: usize,
    pub ff_dim: usize,
    pub n_heads: usize,
    pub n_samples: usize,
    pub n_channels: usize,
    pub n_classes: usize,
}

impl PatchConfig {
    /// Shared `d_model = 64`; the feed-forward width differs per strategy so
    /// that the three parameter counts land within about 1% of each other
    /// for 200-sample, 26-channel trials.
    pub fn reference(
        strategy: Strategy,
        n_samples: usize,
        n_channels: usize,
        n_classes: usize,
    ) -> Self {
        let (patch_len, ff_dim) = match strategy {
            Strategy::Multi => (25, 64),
            Strategy::Uni => (100, 320),
            Strategy::Whole => (1, 280),
        };
        Self {
            strategy,
            patch_len,
            d_model: 64,
            ff_dim,
            n_heads: 1,
            n_samples,
            n_channels,
            n_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_heads != 1 {
            bail!(Argument, "only single-head attention is supported");
        }
        if self.d_model < 4 || self.ff_dim == 0 || self.n_classes < 2 || self.n_channels == 0 {
            bail!(
                Argument,
                "need d_model >= 4, ff_dim >= 1, two classes and one channel"
            );
        }
        if self.strategy != Strategy::Whole {
            if self.patch_len == 0 {
                bail!(Argument, "patch length must be positive");
            }
            if self.n_samples < self.patch_len {
                return Err(crate::Error::Length {
                    needed: self.patch_len,
                    got: self.n_samples,
                });
            }
        } else if self.n_samples == 0 {
            return Err(crate::Error::Length { needed: 1, got: 0 });
        }
        Ok(())
    }

    fn patches_per_channel(&self) -> usize {
        self.n_samples.div_ceil(self.patch_len)
    }

    pub fn n_tokens(&self) -> usize {
        match self.strategy {
            Strategy::Multi => self.patches_per_channel(),
            Strategy::Uni => self.n_channels * self.patches_per_channel(),
            Strategy::Whole => self.n_samples,
        }
    }

    pub fn patch_dim(&self) -> usize {
        match self.strategy {
            Strategy::Multi => self.patch_len * self.n_channels,
            Strategy::Uni => self.patch_len,
            Strategy::Whole => self.n_channels,
        }
    }

    /// Sizes of every parameter tensor, in [`super::Params`] field order.
    pub fn tensor_sizes(&self) -> [usize; 21] {
        let (d, f, k) = (self.d_model, self.ff_dim, self.n_classes);
        [
            self.patch_dim() * d,
            d,                   // projection
            self.n_tokens() * d, // positional
            d,
            d, // ln1
            d * d,
            d,
            d * d,
            d,
            d * d,
            d,
            d * d,
            d, // attention
            d,
            d, // ln2
            d * f,
            f,
            f * d,
            d, // feed-forward
            d * k,
            k, // head
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensor_sizes().iter().sum()
    }

    /// Cuts a channel-major trial (`n_channels` rows of `n_samples`) into
    /// `[n_tokens × patch_dim]`, zero-padding the last partial patch.
    pub fn patches(&self, trial: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        let (t_len, c_len) = (self.n_samples, self.n_channels);
        if trial.len() != t_len * c_len {
            bail!(
                Shape,
                "trial has {} values, expected {} × {}",
                trial.len(),
                c_len,
                t_len
            );
        }
        let (n, p) = (self.n_tokens(), self.patch_dim());
        let mut out = vec![0.0; n * p];
        let at = |c: usize, t: usize| if t < t_len { trial[c * t_len + t] } else { 0.0 };
        match self.strategy {
            Strategy::Multi => {
                let l = self.patch_len;
                for tok in 0..n {
                    for tl in 0..l {
                        for c in 0..c_len {
                            out[tok * p + tl * c_len + c] = at(c, tok * l + tl);
                        }
                    }
                }
            }
            Strategy::Uni => {
                let (l, per) = (self.patch_len, self.patches_per_channel());
                for c in 0..c_len {
                    for j in 0..per {
                        let tok = c * per + j;
                        for tl in 0..l {
                            out[tok * p + tl] = at(c, j * l + tl);
                        }
                    }
                }
            }
            Strategy::Whole => {
                for t in 0..t_len {
                    for c in 0..c_len {
                        out[t * p + c] = at(c, t);
                    }
                }
            }
        }
        Ok(out)
    }
}
