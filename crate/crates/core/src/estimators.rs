//! Unbiased squared-gradient-norm estimation from a batch of stochastic
//! gradients, and the variance of that estimator.
//!
//! For gradients `g₁ … gₙ` drawn i.i.d. around `∇f`, write `S = ‖Σgᵢ‖²` and
//! `Q = Σ‖gᵢ‖²`. Then `S − Q = Σ_{i≠j}⟨gᵢ, gⱼ⟩`, so
//!
//! * `μ = (S − Q) / (n(n−1))` is unbiased for `‖∇f‖²`, and
//! * `γ = S / n²` is unbiased for `‖∇f‖² + σ²/n`.
//!
//! [`EstimatorMode::Raw`] drops both normalizations, as in the practical
//! scheduler, which shifts the ratio `μ/γ` by a factor `(n−1)/n`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm_sq};
use crate::noise::{self, NoiseModel};

/// `n ≥ 2` stochastic gradients of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBatch {
    grads: Vec<Vec<f64>>,
}

impl GradientBatch {
    pub fn new(grads: Vec<Vec<f64>>) -> Result<Self> {
        if grads.len() < 2 {
            return Err(Error::TooFewGradients(grads.len()));
        }
        let d = grads[0].len();
        for g in &grads[1..] {
            check_dim(d, g.len())?;
        }
        Ok(Self { grads })
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.grads[0].len()
    }

    pub fn grads(&self) -> &[Vec<f64>] {
        &self.grads
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.grads
    }

    pub fn sum(&self) -> Vec<f64> {
        crate::linalg::sum_vectors(self.dim(), &self.grads)
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.sum().into_iter().map(|v| v / n).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// `μ = (S − Q)/(n(n−1))`, `γ = S/n²`.
    Normalized,
    /// `μ = S − Q`, `γ = S`.
    #[default]
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Estimate of `‖∇f‖²`. May be negative.
    pub mu: f64,
    /// Estimate of `‖∇f‖² + σ²/n` (normalized mode). Never negative.
    pub gamma: f64,
    /// `μ/γ`, or 0 when `γ = 0` or `μ ≤ 0`.
    pub ratio: f64,
    pub mode: EstimatorMode,
}

/// The single clipping rule: zero when `γ = 0` or `μ ≤ 0`, else `μ/γ`.
pub fn clipped_ratio(mu: f64, gamma: f64) -> f64 {
    if gamma == 0.0 || mu <= 0.0 {
        0.0
    } else {
        mu / gamma
    }
}

fn finish(sum_sq: f64, sum_of_sq: f64, n: usize, mode: EstimatorMode) -> NormEstimate {
    let nf = n as f64;
    let (mu, gamma) = match mode {
        EstimatorMode::Normalized => ((sum_sq - sum_of_sq) / (nf * (nf - 1.0)), sum_sq / (nf * nf)),
        EstimatorMode::Raw => (sum_sq - sum_of_sq, sum_sq),
    };
    NormEstimate { mu, gamma, ratio: clipped_ratio(mu, gamma), mode }
}

/// O(n·d) estimate from `‖Σgᵢ‖²` and `Σ‖gᵢ‖²`.
pub fn estimate(batch: &GradientBatch, mode: EstimatorMode) -> NormEstimate {
    let s = norm_sq(&batch.sum());
    let q: f64 = batch.grads.iter().map(|g| norm_sq(g)).sum();
    finish(s, q, batch.len(), mode)
}

/// O(n²·d) evaluation of `μ` and `γ` straight from pairwise inner products.
/// Always returns the normalized mode.
pub fn pairwise_estimate_bruteforce(batch: &GradientBatch) -> NormEstimate {
    let n = batch.len();
    let (mut off_diag, mut all) = (0.0, 0.0);
    for (i, gi) in batch.grads.iter().enumerate() {
        for (j, gj) in batch.grads.iter().enumerate() {
            let p = dot(gi, gj);
            all += p;
            if i != j {
                off_diag += p;
            }
        }
    }
    let nf = n as f64;
    let mu = off_diag / (nf * (nf - 1.0));
    let gamma = (all / (nf * nf)).max(0.0);
    NormEstimate { mu, gamma, ratio: clipped_ratio(mu, gamma), mode: EstimatorMode::Normalized }
}

/// The published bound on `Var(μ)` for independent zero-mean noise with
/// `E‖ξ‖² = σ²`: `4‖∇‖²σ²/n + σ⁴/(n(n−1))`.
///
/// The noise-noise term counts each unordered pair once, but `(i, j)` and
/// `(j, i)` both contribute, so noise concentrated on one axis can exceed
/// this value. [`variance_worst_case`] is the bound that always holds.
pub fn variance_bound(norm_sq: f64, sigma_sq: f64, n: usize) -> f64 {
    let nf = n as f64;
    4.0 * norm_sq * sigma_sq / nf + sigma_sq * sigma_sq / (nf * (nf - 1.0))
}

/// The published closed form for `Var(μ)` under `ξ ~ N(0, (σ²/d)·I)`, equal
/// to [`variance_bound`]` / d`. It undercounts the noise-noise term by a
/// factor of two; [`variance_gaussian_exact`] is the true value.
pub fn variance_gaussian(norm_sq: f64, sigma_sq: f64, n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    4.0 * norm_sq * sigma_sq / (nf * df) + sigma_sq * sigma_sq / (df * nf * (nf - 1.0))
}

/// `Var(μ)` under `ξ ~ N(0, (σ²/d)·I)`: `4‖∇‖²σ²/(nd) + 2σ⁴/(d·n(n−1))`.
///
/// Writing `μ − ‖∇‖² = (2/n)Σᵢ⟨∇, ξᵢ⟩ + (2/(n(n−1)))Σ_{i<j}⟨ξᵢ, ξⱼ⟩`, the two
/// sums are uncorrelated, `Var⟨∇, ξ⟩ = ‖∇‖²σ²/d` and `Var⟨ξᵢ, ξⱼ⟩ = σ⁴/d`.
pub fn variance_gaussian_exact(norm_sq: f64, sigma_sq: f64, n: usize, d: usize) -> f64 {
    variance_worst_case(norm_sq, sigma_sq, n) / d as f64
}

/// Upper bound on `Var(μ)` that holds for every independent zero-mean noise
/// with `E‖ξ‖² = σ²`: `4‖∇‖²σ²/n + 2σ⁴/(n(n−1))`. Attained by noise along `∇`
/// with a fixed norm.
pub fn variance_worst_case(norm_sq: f64, sigma_sq: f64, n: usize) -> f64 {
    let nf = n as f64;
    4.0 * norm_sq * sigma_sq / nf + 2.0 * sigma_sq * sigma_sq / (nf * (nf - 1.0))
}

/// Sample mean and unbiased sample variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub count: u64,
}

impl Moments {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let mut acc = Welford::default();
        xs.iter().for_each(|&x| acc.push(x));
        acc.moments()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Welford { n, mean, m2 }
    }

    pub(crate) fn moments(&self) -> Moments {
        let variance = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Moments { mean: self.mean, variance, count: self.n }
    }
}

const MC_CHUNK: u64 = 4096;

/// Empirical mean and variance of the normalized `μ` over `trials` batches of
/// `n` gradients `√norm_sq·e₁ + ξᵢ` in dimension `d`, with Gaussian noise.
pub fn monte_carlo_moments(
    grad_norm_sq: f64,
    sigma_sq: f64,
    n: usize,
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<Moments> {
    monte_carlo_moments_with(NoiseModel::Gaussian, grad_norm_sq, sigma_sq, n, d, trials, seed)
}

/// [`monte_carlo_moments`] with a selectable noise model.
///
/// Trials are split into fixed chunks, each on its own random stream, so the
/// result does not depend on the thread count.
pub fn monte_carlo_moments_with(
    noise_model: NoiseModel,
    grad_norm_sq: f64,
    sigma_sq: f64,
    n: usize,
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<Moments> {
    if n < 2 {
        return Err(Error::TooFewGradients(n));
    }
    if d == 0 {
        return Err(Error::invalid("d", "must be positive"));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2"));
    }
    if !(grad_norm_sq >= 0.0 && sigma_sq >= 0.0) {
        return Err(Error::invalid("norm_sq/sigma_sq", "must be nonnegative"));
    }
    let sigma = sigma_sq.sqrt();
    let head = grad_norm_sq.sqrt();
    let chunks = trials.div_ceil(MC_CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = noise::stream(seed, c);
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut w = Welford::default();
            let mut sum = vec![0.0; d];
            let mut g = vec![0.0; d];
            for _ in 0..count {
                sum.iter_mut().for_each(|v| *v = 0.0);
                let mut q = 0.0;
                for _ in 0..n {
                    g.iter_mut().for_each(|v| *v = 0.0);
                    g[0] = head;
                    noise_model.add_sample(&mut rng, sigma, &mut g);
                    q += norm_sq(&g);
                    sum.iter_mut().zip(&g).for_each(|(s, x)| *s += x);
                }
                w.push(finish(norm_sq(&sum), q, n, EstimatorMode::Normalized).mu);
            }
            w
        })
        .reduce(Welford::default, Welford::merge);
    Ok(acc.moments())
}

/// Draws `n` i.i.d. gradients around `true_grad` with the given noise.
pub fn sample_batch<R: Rng + ?Sized>(
    rng: &mut R,
    true_grad: &[f64],
    sigma: f64,
    n: usize,
    noise_model: NoiseModel,
) -> Result<GradientBatch> {
    GradientBatch::new(
        (0..n)
            .map(|_| {
                let mut g = true_grad.to_vec();
                noise_model.add_sample(rng, sigma, &mut g);
                g
            })
            .collect(),
    )
}
