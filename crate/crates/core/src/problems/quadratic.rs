use serde::{Deserialize, Serialize};

use super::{Batch, Objective, ProblemConstants, ProblemKind};
use crate::error::{Error, Result};
use crate::noise::{self, NoiseModel};

/// `f(x) = ½ xᵀAx` with `A = diag(eigenvalues)`.
///
/// Sample `i` carries the noise vector `ξᵢ`, a deterministic function of the
/// noise key and `i`. A batch has loss `f(x) + ⟨ξ̄, x⟩` and gradient `Ax + ξ̄`,
/// where `ξ̄` is the mean noise over the batch. Sample indices are unbounded
/// identifiers, so i.i.d. draws never repeat in practice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoisyQuadratic {
    eigenvalues: Vec<f64>,
    sigma: f64,
    noise: NoiseModel,
    noise_key: u64,
}

const NOISE_KEY_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

impl NoisyQuadratic {
    pub fn new(eigenvalues: Vec<f64>, sigma: f64, noise: NoiseModel, seed: u64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("eigenvalues", "need at least one"));
        }
        if let Some(e) = eigenvalues.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::invalid(
                "eigenvalues",
                format!("must be finite and nonnegative, got {e}"),
            ));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid("sigma", format!("must be finite and nonnegative, got {sigma}")));
        }
        Ok(Self { eigenvalues, sigma, noise, noise_key: seed ^ NOISE_KEY_SALT })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.noise
    }

    /// Noise vector of sample `i`.
    pub fn sample_noise(&self, i: usize) -> Vec<f64> {
        let mut rng = noise::stream(self.noise_key, i as u64);
        self.noise.sample(&mut rng, self.sigma, self.eigenvalues.len())
    }

    fn mean_noise(&self, idx: &[usize]) -> Option<Vec<f64>> {
        if self.sigma == 0.0 {
            return None;
        }
        let d = self.eigenvalues.len();
        let mut acc = vec![0.0; d];
        for &i in idx {
            let mut rng = noise::stream(self.noise_key, i as u64);
            self.noise.add_sample(&mut rng, self.sigma, &mut acc);
        }
        let k = idx.len() as f64;
        acc.iter_mut().for_each(|v| *v /= k);
        Some(acc)
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.eigenvalues.iter().zip(x).map(|(l, xi)| l * xi * xi).sum::<f64>()
    }
}

impl Objective for NoisyQuadratic {
    fn kind(&self) -> ProblemKind {
        ProblemKind::NoisyQuadratic
    }

    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn n_samples(&self) -> Option<usize> {
        None
    }

    fn loss(&self, x: &[f64], batch: Batch<'_>) -> f64 {
        let f = self.value(x);
        match batch {
            Batch::Full => f,
            Batch::Samples(idx) => match self.mean_noise(idx) {
                Some(xi) => f + crate::linalg::dot(&xi, x),
                None => f,
            },
        }
    }

    fn grad(&self, x: &[f64], batch: Batch<'_>) -> Vec<f64> {
        let mut g: Vec<f64> = self.eigenvalues.iter().zip(x).map(|(l, xi)| l * xi).collect();
        if let Batch::Samples(idx) = batch {
            if let Some(xi) = self.mean_noise(idx) {
                g.iter_mut().zip(&xi).for_each(|(a, b)| *a += b);
            }
        }
        g
    }

    fn hvp(&self, _x: &[f64], v: &[f64], _batch: Batch<'_>) -> Option<Vec<f64>> {
        Some(self.eigenvalues.iter().zip(v).map(|(l, vi)| l * vi).collect())
    }

    fn constants(&self, x0: &[f64]) -> ProblemConstants {
        ProblemConstants {
            smoothness: Some(self.eigenvalues.iter().cloned().fold(0.0, f64::max)),
            sigma: Some(self.sigma),
            initial_gap: Some(self.value(x0)),
            // unbounded gradient on ℝᵈ
            lipschitz: None,
            noise_bound: match self.noise {
                NoiseModel::Sphere => Some(self.sigma),
                NoiseModel::Gaussian => None,
            },
        }
    }
}
