//! Single-block encoder: projection + positional embedding, pre-norm
//! single-head attention, pre-norm feed-forward, mean pooling, linear head.
//! Every backward step is written out by hand.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::config::PatchConfig;
use crate::classify::softmax_in_place;
use crate::error::bail;
use crate::linalg::{add_row_bias, col_sums_acc, matmul, matmul_a_bt, matmul_at_b_acc};
use crate::Result;

pub const LN_EPS: f64 = 1e-5;

macro_rules! params {
    ($($field:ident),* $(,)?) => {
        /// All weights, row-major `[in × out]` for matrices.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct Params {
            $(pub $field: Vec<f64>,)*
        }

        impl Params {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn tensors(&self) -> [&Vec<f64>; 21] {
                [$(&self.$field),*]
            }

            pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 21] {
                [$(&mut self.$field),*]
            }
        }
    };
}

params!(
    proj_w, proj_b, pos, ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2,
    b2, head_w, head_b,
);

impl Params {
    pub fn zeros(cfg: &PatchConfig) -> Self {
        let s = cfg.tensor_sizes();
        let mut it = s.iter().map(|&n| vec![0.0; n]);
        let mut next = || it.next().unwrap();
        Self {
            proj_w: next(),
            proj_b: next(),
            pos: next(),
            ln1_g: next(),
            ln1_b: next(),
            wq: next(),
            bq: next(),
            wk: next(),
            bk: next(),
            wv: next(),
            bv: next(),
            wo: next(),
            bo: next(),
            ln2_g: next(),
            ln2_b: next(),
            w1: next(),
            b1: next(),
            w2: next(),
            b2: next(),
            head_w: next(),
            head_b: next(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchModel {
    pub cfg: PatchConfig,
    pub params: Params,
}

/// Embedded tokens `[n_tokens × d_model]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenTensor {
    pub tokens: Vec<f64>,
    pub n_tokens: usize,
    pub d_model: usize,
}

struct LayerNormCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
}

/// Intermediates of one forward pass.
pub struct EncoderCache {
    h1: Vec<f64>,
    ln1: LayerNormCache,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// Row-stochastic attention weights `[n × n]`.
    pub attn: Vec<f64>,
    o: Vec<f64>,
    h2: Vec<f64>,
    ln2: LayerNormCache,
    u: Vec<f64>,
    g: Vec<f64>,
    pooled: Vec<f64>,
    /// Post-block token states `[n × d]`.
    pub out: Vec<f64>,
}

fn layer_norm(x: &[f64], d: usize, gain: &[f64], bias: &[f64]) -> (Vec<f64>, LayerNormCache) {
    let mut y = vec![0.0; x.len()];
    let mut xhat = vec![0.0; x.len()];
    let mut inv_std = Vec::with_capacity(x.len() / d);
    for (r, row) in x.chunks_exact(d).enumerate() {
        let mu = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / d as f64;
        let is = 1.0 / libm::sqrt(var + LN_EPS);
        inv_std.push(is);
        for j in 0..d {
            let h = (row[j] - mu) * is;
            xhat[r * d + j] = h;
            y[r * d + j] = h * gain[j] + bias[j];
        }
    }
    (y, LayerNormCache { xhat, inv_std })
}

fn layer_norm_backward(
    dy: &[f64],
    d: usize,
    gain: &[f64],
    cache: &LayerNormCache,
    dg: &mut [f64],
    db: &mut [f64],
) -> Vec<f64> {
    let mut dx = vec![0.0; dy.len()];
    let mut dxhat = vec![0.0; d];
    for (r, row) in dy.chunks_exact(d).enumerate() {
        let xh = &cache.xhat[r * d..(r + 1) * d];
        for j in 0..d {
            dg[j] += row[j] * xh[j];
            db[j] += row[j];
            dxhat[j] = row[j] * gain[j];
        }
        let mean_dxhat = dxhat.iter().sum::<f64>() / d as f64;
        let mean_dxhat_xhat = dxhat.iter().zip(xh).map(|(a, b)| a * b).sum::<f64>() / d as f64;
        for j in 0..d {
            dx[r * d + j] = cache.inv_std[r] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
        }
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + libm::tanh(GELU_C * (u + 0.044715 * u * u * u)))
}

fn gelu_grad(u: f64) -> f64 {
    let t = libm::tanh(GELU_C * (u + 0.044715 * u * u * u));
    0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * u * u)
}

impl PatchModel {
    /// PyTorch-style init: linear layers uniform in `±1/sqrt(fan_in)`,
    /// positional embeddings uniform in `±0.02`, layer norms at identity.
    pub fn init(cfg: &PatchConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = crate::rng::stream(seed, &["patchlab", "init"]);
        let mut p = Params::zeros(cfg);
        let (d, f) = (cfg.d_model, cfg.ff_dim);
        let mut fill = |t: &mut Vec<f64>, fan_in: usize| {
            let b = 1.0 / libm::sqrt(fan_in as f64);
            t.iter_mut().for_each(|v| *v = rng.random_range(-b..b));
        };
        fill(&mut p.proj_w, cfg.patch_dim());
        fill(&mut p.proj_b, cfg.patch_dim());
        for (w, b) in [
            (&mut p.wq, &mut p.bq),
            (&mut p.wk, &mut p.bk),
            (&mut p.wv, &mut p.bv),
            (&mut p.wo, &mut p.bo),
        ] {
            fill(w, d);
            fill(b, d);
        }
        fill(&mut p.w1, d);
        fill(&mut p.b1, d);
        fill(&mut p.w2, f);
        fill(&mut p.b2, f);
        fill(&mut p.head_w, d);
        fill(&mut p.head_b, d);
        p.pos
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-0.02..0.02));
        p.ln1_g
            .iter_mut()
            .chain(p.ln2_g.iter_mut())
            .for_each(|v| *v = 1.0);
        Ok(Self {
            cfg: cfg.clone(),
            params: p,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Checks tensor sizes against the config and finiteness.
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        let sizes = self.cfg.tensor_sizes();
        for ((t, n), name) in self.params.tensors().iter().zip(sizes).zip(Params::NAMES) {
            if t.len() != n {
                bail!(Shape, "{name} has {} entries, expected {n}", t.len());
            }
            if t.iter().any(|v| !v.is_finite()) {
                bail!(Data, "{name} holds non-finite values");
            }
        }
        Ok(())
    }

    fn embed_patches(&self, patches: &[f64]) -> TokenTensor {
        let (n, d) = (self.cfg.n_tokens(), self.cfg.d_model);
        let mut x = matmul(patches, &self.params.proj_w, n, self.cfg.patch_dim(), d);
        add_row_bias(&mut x, &self.params.proj_b);
        for (v, p) in x.iter_mut().zip(&self.params.pos) {
            *v += p;
        }
        TokenTensor {
            tokens: x,
            n_tokens: n,
            d_model: d,
        }
    }

    /// Patches, projects and adds positional embeddings.
    pub fn tokenize(&self, trial: &[f64]) -> Result<TokenTensor> {
        Ok(self.embed_patches(&self.cfg.patches(trial)?))
    }

    pub fn encoder_forward(&self, tokens: &TokenTensor) -> Result<(Vec<f64>, EncoderCache)> {
        let d = self.cfg.d_model;
        let n = tokens.n_tokens;
        if tokens.d_model != d || tokens.tokens.len() != n * d || n == 0 {
            bail!(
                Shape,
                "token tensor {}×{} does not fit d_model {d}",
                tokens.n_tokens,
                tokens.d_model
            );
        }
        let p = &self.params;
        let x0 = &tokens.tokens;
        let (h1, ln1) = layer_norm(x0, d, &p.ln1_g, &p.ln1_b);
        let proj = |w: &[f64], b: &[f64]| {
            let mut y = matmul(&h1, w, n, d, d);
            add_row_bias(&mut y, b);
            y
        };
        let (q, k, v) = (proj(&p.wq, &p.bq), proj(&p.wk, &p.bk), proj(&p.wv, &p.bv));
        let scale = 1.0 / libm::sqrt(d as f64);
        let mut attn = matmul_a_bt(&q, &k, n, d, n);
        for row in attn.chunks_exact_mut(n) {
            row.iter_mut().for_each(|s| *s *= scale);
            softmax_in_place(row);
        }
        let o = matmul(&attn, &v, n, n, d);
        let mut x1 = matmul(&o, &p.wo, n, d, d);
        add_row_bias(&mut x1, &p.bo);
        for (a, b) in x1.iter_mut().zip(x0) {
            *a += b;
        }
        let (h2, ln2) = layer_norm(&x1, d, &p.ln2_g, &p.ln2_b);
        let f = self.cfg.ff_dim;
        let mut u = matmul(&h2, &p.w1, n, d, f);
        add_row_bias(&mut u, &p.b1);
        let g: Vec<f64> = u.iter().map(|&x| gelu(x)).collect();
        let mut x2 = matmul(&g, &p.w2, n, f, d);
        add_row_bias(&mut x2, &p.b2);
        for (a, b) in x2.iter_mut().zip(&x1) {
            *a += b;
        }
        let mut pooled = vec![0.0; d];
        col_sums_acc(&x2, d, &mut pooled);
        pooled.iter_mut().for_each(|v| *v /= n as f64);
        let mut logits = matmul(&pooled, &p.head_w, 1, d, self.cfg.n_classes);
        add_row_bias(&mut logits, &p.head_b);
        Ok((
            logits,
            EncoderCache {
                h1,
                ln1,
                q,
                k,
                v,
                attn,
                o,
                h2,
                ln2,
                u,
                g,
                pooled,
                out: x2,
            },
        ))
    }

    pub fn logits(&self, trial: &[f64]) -> Result<Vec<f64>> {
        Ok(self.encoder_forward(&self.tokenize(trial)?)?.0)
    }

    pub fn predict_proba(&self, trial: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.logits(trial)?;
        softmax_in_place(&mut z);
        Ok(z)
    }

    /// Adds the gradient of `dlogits · logits` into `grad`.
    fn backward(&self, patches: &[f64], cache: &EncoderCache, dlogits: &[f64], grad: &mut Params) {
        let p = &self.params;
        let (n, d, f, k) = (
            self.cfg.n_tokens(),
            self.cfg.d_model,
            self.cfg.ff_dim,
            self.cfg.n_classes,
        );

        matmul_at_b_acc(&cache.pooled, dlogits, 1, d, k, &mut grad.head_w);
        col_sums_acc(dlogits, k, &mut grad.head_b);
        let dpooled = matmul_a_bt(dlogits, &p.head_w, 1, k, d);
        let mut dx2 = vec![0.0; n * d];
        for row in dx2.chunks_exact_mut(d) {
            for (r, g) in row.iter_mut().zip(&dpooled) {
                *r = g / n as f64;
            }
        }

        // feed-forward branch
        matmul_at_b_acc(&cache.g, &dx2, n, f, d, &mut grad.w2);
        col_sums_acc(&dx2, d, &mut grad.b2);
        let mut du = matmul_a_bt(&dx2, &p.w2, n, d, f);
        for (g, u) in du.iter_mut().zip(&cache.u) {
            *g *= gelu_grad(*u);
        }
        matmul_at_b_acc(&cache.h2, &du, n, d, f, &mut grad.w1);
        col_sums_acc(&du, f, &mut grad.b1);
        let dh2 = matmul_a_bt(&du, &p.w1, n, f, d);
        let mut dx1 = layer_norm_backward(
            &dh2,
            d,
            &p.ln2_g,
            &cache.ln2,
            &mut grad.ln2_g,
            &mut grad.ln2_b,
        );
        for (a, b) in dx1.iter_mut().zip(&dx2) {
            *a += b;
        }

        // attention branch
        matmul_at_b_acc(&cache.o, &dx1, n, d, d, &mut grad.wo);
        col_sums_acc(&dx1, d, &mut grad.bo);
        let d_o = matmul_a_bt(&dx1, &p.wo, n, d, d);
        let da = matmul_a_bt(&d_o, &cache.v, n, d, n);
        let mut dv = vec![0.0; n * d];
        matmul_at_b_acc(&cache.attn, &d_o, n, n, d, &mut dv);
        let scale = 1.0 / libm::sqrt(d as f64);
        let mut ds = vec![0.0; n * n];
        for r in 0..n {
            let a = &cache.attn[r * n..(r + 1) * n];
            let g = &da[r * n..(r + 1) * n];
            let dot: f64 = a.iter().zip(g).map(|(x, y)| x * y).sum();
            for j in 0..n {
                ds[r * n + j] = a[j] * (g[j] - dot) * scale;
            }
        }
        let dq = matmul(&ds, &cache.k, n, n, d);
        let mut dk = vec![0.0; n * d];
        matmul_at_b_acc(&ds, &cache.q, n, n, d, &mut dk);
        let mut dh1 = vec![0.0; n * d];
        for (dy, w, gw, gb) in [
            (&dq, &p.wq, &mut grad.wq, &mut grad.bq),
            (&dk, &p.wk, &mut grad.wk, &mut grad.bk),
            (&dv, &p.wv, &mut grad.wv, &mut grad.bv),
        ] {
            matmul_at_b_acc(&cache.h1, dy, n, d, d, gw);
            col_sums_acc(dy, d, gb);
            for (a, b) in dh1.iter_mut().zip(matmul_a_bt(dy, w, n, d, d)) {
                *a += b;
            }
        }
        let mut dx0 = layer_norm_backward(
            &dh1,
            d,
            &p.ln1_g,
            &cache.ln1,
            &mut grad.ln1_g,
            &mut grad.ln1_b,
        );
        for (a, b) in dx0.iter_mut().zip(&dx1) {
            *a += b;
        }

        // embedding
        for (g, v) in grad.pos.iter_mut().zip(&dx0) {
            *g += v;
        }
        col_sums_acc(&dx0, d, &mut grad.proj_b);
        matmul_at_b_acc(patches, &dx0, n, self.cfg.patch_dim(), d, &mut grad.proj_w);
    }

    /// Mean cross-entropy over the batch.
    pub fn loss(&self, batch: &[(&[f64], usize)]) -> Result<f64> {
        let mut total = 0.0;
        for &(trial, label) in batch {
            let z = self.logits(trial)?;
            total += cross_entropy(&z, label)?;
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &[(&[f64], usize)]) -> Result<(f64, Params)> {
        let mut grad = Params::zeros(&self.cfg);
        let mut total = 0.0;
        let inv = 1.0 / batch.len().max(1) as f64;
        for &(trial, label) in batch {
            let patches = self.cfg.patches(trial)?;
            let tokens = self.embed_patches(&patches);
            let (z, cache) = self.encoder_forward(&tokens)?;
            total += cross_entropy(&z, label)?;
            let mut dz = z;
            softmax_in_place(&mut dz);
            dz[label] -= 1.0;
            dz.iter_mut().for_each(|v| *v *= inv);
            self.backward(&patches, &cache, &dz, &mut grad);
        }
        Ok((total * inv, grad))
    }
}

fn cross_entropy(z: &[f64], label: usize) -> Result<f64> {
    if label >= z.len() {
        bail!(Shape, "label {label} out of range for {} classes", z.len());
    }
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(m + libm::log(z.iter().map(|v| libm::exp(v - m)).sum::<f64>()) - z[label])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patchlab::Strategy;
    use rand_distr::{Distribution, StandardNormal};

    fn small(strategy: Strategy) -> PatchConfig {
        PatchConfig {
            strategy,
            patch_len: 4,
            d_model: 8,
            ff_dim: 12,
            n_heads: 1,
            n_samples: 14,
            n_channels: 3,
            n_classes: 3,
        }
    }

    fn trial(cfg: &PatchConfig, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, &["model-test"]);
        (0..cfg.n_samples * cfg.n_channels)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    }

    #[test]
    fn count_matches_tensors() {
        for s in Strategy::ALL {
            let cfg = small(s);
            let m = PatchModel::init(&cfg, 1).unwrap();
            assert_eq!(m.param_count(), cfg.param_count());
            assert_eq!(m.params.flatten().len(), cfg.param_count());
            m.validate().unwrap();
        }
    }

    #[test]
    fn attention_rows_are_distributions() {
        for s in Strategy::ALL {
            let cfg = small(s);
            let m = PatchModel::init(&cfg, 2).unwrap();
            let (_, cache) = m
                .encoder_forward(&m.tokenize(&trial(&cfg, 3)).unwrap())
                .unwrap();
            let n = cfg.n_tokens();
            for row in cache.attn.chunks_exact(n) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn permuting_tokens_keeps_logits() {
        let cfg = small(Strategy::Uni);
        let mut m = PatchModel::init(&cfg, 4).unwrap();
        m.params.pos.iter_mut().for_each(|v| *v = 0.0);
        let t = m.tokenize(&trial(&cfg, 5)).unwrap();
        let (n, d) = (t.n_tokens, t.d_model);
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut shuffled = t.clone();
        for (dst, &src) in perm.iter().enumerate() {
            shuffled.tokens[dst * d..(dst + 1) * d]
                .copy_from_slice(&t.tokens[src * d..(src + 1) * d]);
        }
        let (a, ca) = m.encoder_forward(&t).unwrap();
        let (b, cb) = m.encoder_forward(&shuffled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
        for (dst, &src) in perm.iter().enumerate() {
            for j in 0..d {
                assert!((cb.out[dst * d + j] - ca.out[src * d + j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn duplicate_tokens_match() {
        let cfg = small(Strategy::Whole);
        let m = PatchModel::init(&cfg, 6).unwrap();
        let d = cfg.d_model;
        let row: Vec<f64> = (0..d).map(|i| i as f64 * 0.1 - 0.3).collect();
        let t = TokenTensor {
            tokens: row.repeat(cfg.n_tokens()),
            n_tokens: cfg.n_tokens(),
            d_model: d,
        };
        let (_, c) = m.encoder_forward(&t).unwrap();
        for r in 1..cfg.n_tokens() {
            for j in 0..d {
                assert!((c.out[r * d + j] - c.out[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn head_bias_gradient_closed_form() {
        let cfg = small(Strategy::Multi);
        let m = PatchModel::init(&cfg, 7).unwrap();
        let trials: Vec<Vec<f64>> = (0..4).map(|i| trial(&cfg, 10 + i)).collect();
        let batch: Vec<(&[f64], usize)> = trials
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_slice(), i % 3))
            .collect();
        let (_, g) = m.loss_and_grad(&batch).unwrap();
        let mut expect = [0.0; 3];
        for &(t, l) in &batch {
            let p = m.predict_proba(t).unwrap();
            for c in 0..3 {
                expect[c] += (p[c] - f64::from(u8::from(c == l))) / 4.0;
            }
        }
        for (a, b) in g.head_b.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        let cfg = small(Strategy::Multi);
        let m = PatchModel::init(&cfg, 1).unwrap();
        assert!(m.logits(&[0.0; 5]).is_err());
        let t = TokenTensor {
            tokens: vec![0.0; 10],
            n_tokens: 2,
            d_model: 5,
        };
        assert!(m.encoder_forward(&t).is_err());
    }

    #[test]
    fn gelu_derivative() {
        for u in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let fd = (gelu(u + 1e-6) - gelu(u - 1e-6)) / 2e-6;
            assert!((fd - gelu_grad(u)).abs() < 1e-8);
        }
    }
}
