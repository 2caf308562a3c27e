use rand::Rng;
use rand_distr::StandardNormal;

use super::{Batch, Objective, ProblemConstants, ProblemKind};
use crate::error::{Error, Result};
use crate::linalg::{dot, power_iteration};
use crate::noise;

/// Binary logistic regression on a generated dataset.
///
/// Features are standard normal; labels are the sign of `⟨w*, a⟩ + 0.5·ε`
/// for a hidden `w*`, so the classes are separable up to label noise near the
/// boundary. The loss is the mean of `log(1 + exp(−s·⟨w, a⟩))` with `s = ±1`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    dim: usize,
    features: Vec<f64>,
    signs: Vec<f64>,
    smoothness: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticRegression {
    pub fn generate(n_samples: usize, dim: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be positive"));
        }
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let mut rng = noise::stream(seed, u64::MAX);
        let w_star: Vec<f64> =
            (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0 / (dim as f64).sqrt()).collect();
        let mut features = Vec::with_capacity(n_samples * dim);
        let mut signs = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let a: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let eps: f64 = rng.sample(StandardNormal);
            signs.push(if dot(&a, &w_star) + 0.5 * eps >= 0.0 { 1.0 } else { -1.0 });
            features.extend_from_slice(&a);
        }
        let mut lr = Self { dim, features, signs, smoothness: 0.0 };
        // L = λ_max(AᵀA / m) / 4
        let m = n_samples as f64;
        let gram = power_iteration(dim, 500, |v| {
            let mut out = vec![0.0; dim];
            for i in 0..n_samples {
                let a = lr.row(i);
                let c = dot(a, v) / m;
                out.iter_mut().zip(a).for_each(|(o, ai)| *o += c * ai);
            }
            out
        });
        lr.smoothness = gram / 4.0;
        Ok(lr)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.signs.len()
    }

    fn for_each_sample(&self, batch: Batch<'_>, mut f: impl FnMut(usize)) -> f64 {
        match batch {
            Batch::Full => {
                (0..self.len()).for_each(&mut f);
                self.len() as f64
            }
            Batch::Samples(idx) => {
                idx.iter().copied().for_each(&mut f);
                idx.len() as f64
            }
        }
    }

    /// Gradient of the loss on sample `i` alone.
    pub fn sample_grad(&self, x: &[f64], i: usize) -> Vec<f64> {
        self.grad(x, Batch::Samples(&[i]))
    }
}

impl Objective for LogisticRegression {
    fn kind(&self) -> ProblemKind {
        ProblemKind::LogisticRegression
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn n_samples(&self) -> Option<usize> {
        Some(self.len())
    }

    fn loss(&self, x: &[f64], batch: Batch<'_>) -> f64 {
        let mut total = 0.0;
        let m = self.for_each_sample(batch, |i| {
            total += softplus(-self.signs[i] * dot(self.row(i), x));
        });
        total / m
    }

    fn grad(&self, x: &[f64], batch: Batch<'_>) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let m = self.for_each_sample(batch, |i| {
            let a = self.row(i);
            let s = self.signs[i];
            let c = -s * sigmoid(-s * dot(a, x));
            g.iter_mut().zip(a).for_each(|(gi, ai)| *gi += c * ai);
        });
        g.iter_mut().for_each(|v| *v /= m);
        g
    }

    fn hvp(&self, x: &[f64], v: &[f64], batch: Batch<'_>) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        let m = self.for_each_sample(batch, |i| {
            let a = self.row(i);
            let p = sigmoid(dot(a, x));
            let c = p * (1.0 - p) * dot(a, v);
            out.iter_mut().zip(a).for_each(|(o, ai)| *o += c * ai);
        });
        out.iter_mut().for_each(|o| *o /= m);
        Some(out)
    }

    fn constants(&self, _x0: &[f64]) -> ProblemConstants {
        ProblemConstants { smoothness: Some(self.smoothness), ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(-800.0), 0.0);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
    }

    #[test]
    fn loss_at_zero_is_ln2() {
        let lr = LogisticRegression::generate(50, 4, 1).unwrap();
        let l = lr.loss(&[0.0; 4], Batch::Full);
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn both_classes_are_present() {
        let lr = LogisticRegression::generate(200, 5, 9).unwrap();
        let pos = lr.signs.iter().filter(|s| **s > 0.0).count();
        assert!(pos > 40 && pos < 160, "{pos}");
    }
}
