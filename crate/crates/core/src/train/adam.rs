//! Adam with bias correction. Moment buffers live beside the weights,
//! never inside them, and are not serialized.

use crate::error::{Error, Result};
use crate::net::weights::NetworkWeights;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.99,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(weights: &NetworkWeights) -> Self {
        let zeros: Vec<Vec<f64>> = weights.params.iter().map(|p| vec![0.0; p.len()]).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update of every parameter buffer in place.
    pub fn step(
        &mut self,
        cfg: &AdamConfig,
        weights: &mut NetworkWeights,
        grads: &[Vec<f64>],
    ) -> Result<()> {
        if grads.len() != weights.params.len()
            || grads
                .iter()
                .zip(&weights.params)
                .any(|(g, p)| g.len() != p.len())
        {
            return Err(Error::BadConfig(
                "gradient buffers do not line up with the parameters".into(),
            ));
        }
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for (idx, grad) in grads.iter().enumerate() {
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            let p = &mut weights.params[idx];
            for i in 0..grad.len() {
                let g = grad[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p[i] -= cfg.lr * mhat / (vhat.sqrt() + cfg.eps);
            }
        }
        Ok(())
    }
}
