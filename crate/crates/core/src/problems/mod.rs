//! Stochastic first- and second-order oracles for synthetic problems.
//!
//! A [`ProblemHandle`] couples an immutable [`Objective`] with one seeded random
//! stream. Batches are addressed by sample indices, so the same
//! [`BatchSelector::Indices`] reproduces the same gradient, loss and
//! Hessian-vector product. [`BatchSelector::Fresh`] draws i.i.d. indices
//! (uniform, with replacement) from the handle's stream.

mod logistic;
mod mlp;
mod quadratic;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::norm_sq;
use crate::noise::{self, NoiseModel, Stream};

pub use logistic::LogisticRegression;
pub use mlp::MlpClassifier;
pub use quadratic::NoisyQuadratic;

/// Which samples an oracle call is evaluated on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchSelector {
    /// The full objective: the whole dataset, or the noiseless quadratic.
    Full,
    /// Explicit sample indices. Repeats are allowed.
    Indices(Vec<usize>),
    /// A fresh i.i.d. batch of the given size drawn from the handle's stream.
    Fresh(usize),
}

/// A resolved batch as seen by an [`Objective`].
#[derive(Debug, Clone, Copy)]
pub enum Batch<'a> {
    Full,
    Samples(&'a [usize]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    NoisyQuadratic,
    LogisticRegression,
    MlpClassifier,
    Custom,
}

/// Analytic constants of a problem, when known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Smoothness `L`.
    pub smoothness: Option<f64>,
    /// Per-sample noise standard deviation `σ` (`E‖ξ‖² = σ²`).
    pub sigma: Option<f64>,
    /// Initial suboptimality `R = f(x₀) − f*`.
    pub initial_gap: Option<f64>,
    /// Lipschitz bound `M` of the objective.
    pub lipschitz: Option<f64>,
    /// Almost-sure bound `G` on the per-sample noise norm.
    pub noise_bound: Option<f64>,
}

impl ProblemConstants {
    pub fn require_smoothness(&self) -> Result<f64> {
        self.smoothness.ok_or(Error::MissingConstant("L"))
    }
    pub fn require_sigma(&self) -> Result<f64> {
        self.sigma.ok_or(Error::MissingConstant("sigma"))
    }
    pub fn require_initial_gap(&self) -> Result<f64> {
        self.initial_gap.ok_or(Error::MissingConstant("R"))
    }
}

/// A differentiable objective with per-sample structure.
///
/// Implementations are immutable and may be shared across threads. All
/// randomness needed to evaluate a batch must be a deterministic function of
/// the sample indices.
pub trait Objective: Send + Sync + std::fmt::Debug {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Custom
    }
    fn dim(&self) -> usize;
    /// Dataset size. `None` means sample indices are unbounded identifiers.
    fn n_samples(&self) -> Option<usize>;
    fn loss(&self, x: &[f64], batch: Batch<'_>) -> f64;
    fn grad(&self, x: &[f64], batch: Batch<'_>) -> Vec<f64>;
    /// Exact Hessian-vector product, or `None` to fall back to finite differences.
    fn hvp(&self, _x: &[f64], _v: &[f64], _batch: Batch<'_>) -> Option<Vec<f64>> {
        None
    }
    fn constants(&self, x0: &[f64]) -> ProblemConstants;
}

/// An objective plus a starting point and a seeded random stream.
#[derive(Debug, Clone)]
pub struct ProblemHandle {
    objective: Arc<dyn Objective>,
    x0: Vec<f64>,
    constants: ProblemConstants,
    seed: u64,
    batch_size: usize,
    rng: Stream,
}

impl ProblemHandle {
    pub fn new(objective: Arc<dyn Objective>, x0: Vec<f64>, seed: u64) -> Result<Self> {
        check_dim(objective.dim(), x0.len())?;
        if objective.dim() == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        let constants = objective.constants(&x0);
        Ok(Self { objective, x0, constants, seed, batch_size: 1, rng: noise::stream(seed, 0) })
    }

    /// `f(x) = ½ xᵀ diag(eigenvalues) x` with additive per-sample noise.
    pub fn noisy_quadratic(
        dim: usize,
        eigenvalues: &[f64],
        sigma: f64,
        noise: NoiseModel,
        seed: u64,
    ) -> Result<Self> {
        check_dim(dim, eigenvalues.len())?;
        let q = NoisyQuadratic::new(eigenvalues.to_vec(), sigma, noise, seed)?;
        Self::new(Arc::new(q), vec![1.0; dim], seed)
    }

    pub fn logistic_regression(
        n_samples: usize,
        dim: usize,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if batch_size == 0 || batch_size > n_samples {
            return Err(Error::invalid(
                "batch_size",
                format!("must lie in 1..={n_samples}, got {batch_size}"),
            ));
        }
        let lr = LogisticRegression::generate(n_samples, dim, seed)?;
        let d = lr.dim();
        Self::new(Arc::new(lr), vec![0.0; d], seed)?.with_batch_size(batch_size)
    }

    pub fn mlp_classifier(
        layer_sizes: &[usize],
        n_samples: usize,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if batch_size == 0 || batch_size > n_samples {
            return Err(Error::invalid(
                "batch_size",
                format!("must lie in 1..={n_samples}, got {batch_size}"),
            ));
        }
        let mlp = MlpClassifier::generate(layer_sizes, n_samples, seed)?;
        let x0 = mlp.initial_weights(seed);
        Self::new(Arc::new(mlp), x0, seed)?.with_batch_size(batch_size)
    }

    /// Sets the number of samples behind one stochastic gradient.
    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        if let Some(n) = self.n_samples() {
            if batch_size > n {
                return Err(Error::invalid(
                    "batch_size",
                    format!("must lie in 1..={n}, got {batch_size}"),
                ));
            }
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    /// Samples behind one stochastic gradient.
    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// A fresh selector of the default batch size.
    pub fn fresh(&self) -> BatchSelector {
        BatchSelector::Fresh(self.batch_size)
    }

    /// Replaces the starting point and recomputes point-dependent constants.
    pub fn with_initial_point(mut self, x0: Vec<f64>) -> Result<Self> {
        check_dim(self.dim(), x0.len())?;
        self.constants = self.objective.constants(&x0);
        self.x0 = x0;
        Ok(self)
    }

    /// A copy sharing the objective but drawing from an independent stream.
    pub fn branch(&self, stream: u64) -> Self {
        Self {
            objective: Arc::clone(&self.objective),
            x0: self.x0.clone(),
            constants: self.constants,
            seed: self.seed,
            batch_size: self.batch_size,
            rng: noise::stream(self.seed, stream.wrapping_add(1)),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
    pub fn kind(&self) -> ProblemKind {
        self.objective.kind()
    }
    pub fn constants(&self) -> &ProblemConstants {
        &self.constants
    }
    pub fn initial_point(&self) -> &[f64] {
        &self.x0
    }
    pub fn n_samples(&self) -> Option<usize> {
        self.objective.n_samples()
    }
    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    /// Draws `size` i.i.d. sample indices from the stream.
    pub fn draw_indices(&mut self, size: usize) -> Vec<usize> {
        match self.objective.n_samples() {
            Some(n) => (0..size).map(|_| self.rng.random_range(0..n)).collect(),
            None => (0..size).map(|_| self.rng.random::<u64>() as usize).collect(),
        }
    }

    /// Turns a `Fresh` selector into explicit indices; validates the others.
    pub fn resolve(&mut self, b: &BatchSelector) -> Result<BatchSelector> {
        match b {
            BatchSelector::Full => Ok(BatchSelector::Full),
            BatchSelector::Indices(idx) => {
                self.check_indices(idx)?;
                Ok(b.clone())
            }
            BatchSelector::Fresh(size) => {
                if *size == 0 {
                    return Err(Error::invalid("batch", "fresh batch size must be positive"));
                }
                Ok(BatchSelector::Indices(self.draw_indices(*size)))
            }
        }
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        if idx.is_empty() {
            return Err(Error::invalid("batch", "index list is empty"));
        }
        if let Some(n) = self.objective.n_samples() {
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, len: n });
            }
        }
        Ok(())
    }

    fn with_batch<T>(
        &mut self,
        b: &BatchSelector,
        f: impl FnOnce(&dyn Objective, Batch<'_>) -> T,
    ) -> Result<T> {
        let resolved = self.resolve(b)?;
        let batch = match &resolved {
            BatchSelector::Indices(idx) => Batch::Samples(idx),
            _ => Batch::Full,
        };
        Ok(f(self.objective.as_ref(), batch))
    }

    pub fn loss(&mut self, x: &[f64], b: &BatchSelector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        self.with_batch(b, |o, batch| o.loss(x, batch))
    }

    pub fn stochastic_grad(&mut self, x: &[f64], b: &BatchSelector) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        self.with_batch(b, |o, batch| o.grad(x, batch))
    }

    pub fn full_loss(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.objective.loss(x, Batch::Full))
    }

    pub fn full_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.objective.grad(x, Batch::Full))
    }

    /// `∇²f_b(x)·v`, analytic when the objective provides it, otherwise by
    /// central differences of the batch gradient.
    pub fn hvp(&mut self, x: &[f64], v: &[f64], b: &BatchSelector) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), v.len())?;
        self.with_batch(b, |o, batch| {
            o.hvp(x, v, batch).unwrap_or_else(|| fd_hvp(o, x, v, batch))
        })
    }

    /// Central-difference Hessian-vector product, regardless of whether an
    /// analytic form exists.
    pub fn hvp_finite_difference(
        &mut self,
        x: &[f64],
        v: &[f64],
        b: &BatchSelector,
    ) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), v.len())?;
        self.with_batch(b, |o, batch| fd_hvp(o, x, v, batch))
    }
}

/// Step `h = ∛ε · (1 + ‖x‖) / max(‖v‖, 1e-12)`.
pub(crate) fn fd_step(x: &[f64], v: &[f64]) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + norm_sq(x).sqrt()) / norm_sq(v).sqrt().max(1e-12)
}

fn fd_hvp(o: &dyn Objective, x: &[f64], v: &[f64], batch: Batch<'_>) -> Vec<f64> {
    let h = fd_step(x, v);
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let gp = o.grad(&xp, batch);
    let gm = o.grad(&xm, batch);
    gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(sigma: f64) -> ProblemHandle {
        ProblemHandle::noisy_quadratic(2, &[2.0, 1.0], sigma, NoiseModel::Gaussian, 3).unwrap()
    }

    #[test]
    fn noiseless_quadratic_gradient() {
        let mut p = quad(0.0);
        let g = p.stochastic_grad(&[1.0, 1.0], &BatchSelector::Fresh(4)).unwrap();
        assert_eq!(g, vec![2.0, 1.0]);
        assert_eq!(p.constants().smoothness, Some(2.0));
    }

    #[test]
    fn quadratic_hvp_is_a_times_v() {
        let mut p = quad(1.0);
        let hv = p.hvp(&[0.3, -0.7], &[1.0, 0.0], &BatchSelector::Fresh(3)).unwrap();
        assert_eq!(hv, vec![2.0, 0.0]);
    }

    #[test]
    fn zero_noise_stochastic_equals_full() {
        let mut p = quad(0.0);
        let x = [0.25, -3.5];
        let s = p.stochastic_grad(&x, &BatchSelector::Fresh(1)).unwrap();
        assert_eq!(s, p.full_grad(&x).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut p = quad(0.0);
        assert!(matches!(
            p.stochastic_grad(&[1.0], &BatchSelector::Full),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(p.hvp(&[1.0, 1.0], &[1.0], &BatchSelector::Full).is_err());
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let r = ProblemHandle::noisy_quadratic(2, &[1.0, -0.5], 0.0, NoiseModel::Gaussian, 0);
        assert!(r.is_err());
    }

    #[test]
    fn same_indices_reproduce_the_same_gradient() {
        let mut p = quad(1.0);
        let b = p.resolve(&BatchSelector::Fresh(5)).unwrap();
        let g1 = p.stochastic_grad(&[1.0, 2.0], &b).unwrap();
        let g2 = p.stochastic_grad(&[1.0, 2.0], &b).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut p = ProblemHandle::logistic_regression(10, 3, 2, 0).unwrap();
        let r = p.stochastic_grad(&[0.0; 3], &BatchSelector::Indices(vec![3, 10]));
        assert_eq!(r, Err(Error::IndexOutOfRange { index: 10, len: 10 }));
    }

    #[test]
    fn oversized_batch_is_rejected() {
        assert!(ProblemHandle::logistic_regression(10, 3, 11, 0).is_err());
        assert!(ProblemHandle::mlp_classifier(&[2, 4, 3], 10, 11, 0).is_err());
    }
}
