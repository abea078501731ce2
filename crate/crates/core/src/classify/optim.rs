//! Adam with decoupled weight decay and the cosine learning-rate schedule.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl AdamW {
    /// One moment buffer per parameter tensor of the given sizes.
    pub fn new(sizes: &[usize], weight_decay: f64) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    /// Advance the shared step counter; call once per minibatch before the
    /// per-tensor updates.
    pub fn tick(&mut self) {
        self.t += 1;
    }

    pub fn update(&mut self, tensor: usize, param: &mut [f64], grad: &[f64], lr: f64) {
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - libm::pow(b1, f64::from(self.t));
        let c2 = 1.0 - libm::pow(b2, f64::from(self.t));
        let (m, v) = (&mut self.m[tensor], &mut self.v[tensor]);
        for i in 0..param.len() {
            let g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            param[i] -= lr * self.weight_decay * param[i];
            param[i] -= lr * (m[i] / c1) / (libm::sqrt(v[i] / c2) + self.eps);
        }
    }
}

/// Learning rate for `epoch` (0-based) annealed from `base` to 0 over
/// `max_epochs`.
pub fn cosine_lr(base: f64, epoch: usize, max_epochs: usize) -> f64 {
    base * 0.5 * (1.0 + libm::cos(PI * epoch as f64 / max_epochs as f64))
}
