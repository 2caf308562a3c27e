//! Descent-direction producers for the general-optimizer scheduler.
//!
//! Each optimizer maps a stochastic gradient to a direction `d`; the caller
//! applies `x ← x − η·d` with its own stepsize `η`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    /// Heavy ball: `v ← m·v + g`, `d = v`.
    Momentum {
        #[serde(default = "default_momentum")]
        momentum: f64,
    },
    /// Bias-corrected Adam without weight decay.
    Adam {
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

fn default_momentum() -> f64 {
    0.9
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-7
}

impl OptimizerKind {
    pub fn momentum() -> Self {
        OptimizerKind::Momentum { momentum: default_momentum() }
    }

    pub fn adam() -> Self {
        OptimizerKind::Adam { beta1: default_beta1(), beta2: default_beta2(), eps: default_eps() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, dim: usize) -> Self {
        let (first, second) = match kind {
            OptimizerKind::Sgd => (vec![], vec![]),
            OptimizerKind::Momentum { .. } => (vec![0.0; dim], vec![]),
            OptimizerKind::Adam { .. } => (vec![0.0; dim], vec![0.0; dim]),
        };
        Self { kind, first, second, step: 0 }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Second-moment buffer (Adam only).
    pub fn second_moment(&self) -> &[f64] {
        &self.second
    }

    pub fn direction(&mut self, grad: &[f64]) -> Result<Vec<f64>> {
        if !matches!(self.kind, OptimizerKind::Sgd) {
            check_dim(self.first.len(), grad.len())?;
        }
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => Ok(grad.to_vec()),
            OptimizerKind::Momentum { momentum } => {
                for (v, g) in self.first.iter_mut().zip(grad) {
                    *v = momentum * *v + g;
                }
                Ok(self.first.clone())
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                let mut d = Vec::with_capacity(grad.len());
                for ((m, v), g) in self.first.iter_mut().zip(self.second.iter_mut()).zip(grad) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    d.push((*m / c1) / ((*v / c2).sqrt() + eps));
                }
                Ok(d)
            }
        }
    }
}
