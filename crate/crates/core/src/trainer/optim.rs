//! Optimizers and the learning-rate schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;

/// Cosine annealing from `lr_max` at epoch 0 to `lr_min` at the final epoch:
/// `lr_min + ½(lr_max − lr_min)(1 + cos(π·epoch/(epochs−1)))`.
pub fn cosine_lr(epoch: usize, epochs: usize, lr_max: f64, lr_min: f64) -> f64 {
    debug_assert!(epoch < epochs);
    if epochs <= 1 {
        return lr_max;
    }
    let progress = epoch as f64 / (epochs - 1) as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Adam with first/second-moment bias correction. β₁ = 0.9, β₂ = 0.999,
/// ε = 1e-8.
#[derive(Debug, Clone)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(len: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// One update over the full vector.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        let len = params.len();
        self.step_range(params, grads, lr, 0..len)
    }

    /// One update restricted to `range`; entries outside it (and their
    /// moments) are untouched, which is how frozen front ends and the
    /// SPSA-handled angles are masked out of the view.
    pub fn step_range(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
        range: std::ops::Range<usize>,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid(format!(
                "adam state holds {} entries, got params {} / grads {}",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in range {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Gain-sequence constants of the simultaneous-perturbation optimizer:
/// `a_k = a/(A + k + 1)^α`, `c_k = c/(k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            a: 0.2,
            c: 0.1,
            big_a: 10.0,
            alpha: 0.602,
            gamma: 0.101,
        }
    }
}

/// Simultaneous Perturbation Stochastic Approximation: estimates a descent
/// direction from two loss evaluations at Rademacher-perturbed parameters.
/// Requires no gradients, which is what makes it usable on noisy circuits.
#[derive(Debug, Clone)]
pub struct Spsa {
    config: SpsaConfig,
    k: u64,
}

impl Spsa {
    pub fn new(config: SpsaConfig) -> Self {
        Spsa { config, k: 0 }
    }

    pub fn steps_taken(&self) -> u64 {
        self.k
    }

    /// One SPSA update: draw Δ ∈ {−1, +1}ⁿ, evaluate the loss at θ ± c_k·Δ,
    /// form ĝ_i = (L₊ − L₋)/(2 c_k)·Δ_i (Δ_i⁻¹ = Δ_i), and descend with gain
    /// a_k. Exactly two loss evaluations per step.
    pub fn step(
        &mut self,
        params: &mut [f64],
        mut loss_fn: impl FnMut(&[f64]) -> Result<f64>,
        rng: &mut Prng,
    ) -> Result<()> {
        let k = self.k as f64;
        let a_k = self.config.a / (self.config.big_a + k + 1.0).powf(self.config.alpha);
        let c_k = self.config.c / (k + 1.0).powf(self.config.gamma);

        let delta: Vec<f64> = (0..params.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();

        let mut probe: Vec<f64> = params
            .iter()
            .zip(&delta)
            .map(|(p, d)| p + c_k * d)
            .collect();
        let loss_plus = loss_fn(&probe)?;
        for ((q, p), d) in probe.iter_mut().zip(params.iter()).zip(&delta) {
            *q = p - c_k * d;
        }
        let loss_minus = loss_fn(&probe)?;

        let scale = (loss_plus - loss_minus) / (2.0 * c_k);
        for (p, d) in params.iter_mut().zip(&delta) {
            *p -= a_k * scale * d;
        }
        self.k += 1;
        Ok(())
    }
}
