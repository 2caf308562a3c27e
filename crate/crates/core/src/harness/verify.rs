//! Statistical checks of the closed-form claims, each returning a verdict
//! with the measured value, its target and the tolerance used.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_trials, HarnessError, HarnessResult, ProblemSpec, RunConfig, SchedulerSpec};
use crate::estimators::{
    estimate, monte_carlo_moments_with, variance_bound, variance_gaussian, variance_gaussian_exact, EstimatorMode,
    Moments,
};
use crate::linalg::norm_sq;
use crate::noise::NoiseModel;
use crate::problems::{BatchSelector, ProblemHandle};
use crate::schedulers::{
    glyder_practical_step, glyder_theoretical_step, DirectionAggregation, DirectionSource,
    EmaConvention, GlyderState, PracticalConfig,
};
use crate::sharding::shard_gradients;
use crate::smoothness::SmoothnessEstimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// The normalized `μ` has mean `‖∇f‖²`.
    Unbiased,
    /// `Var(μ)` under Gaussian noise equals the closed form.
    VarianceGaussian,
    /// `Var(μ)` under bounded non-Gaussian noise stays below the general bound.
    VarianceBound,
    /// Oracle inner-product stepsize on a noisy quadratic.
    InnerProductRate,
    /// Oracle expected stepsize on a noisy quadratic.
    ExpectedRate,
    /// The two-set estimated stepsize on a noisy quadratic.
    GlyderRate,
    /// The squared shard mean overshoots `‖∇f‖²` by `σ²/n`; `μ` does not.
    MeanGap,
    /// Without noise every ratio is exact and the iterates are plain GD.
    NoiselessFixedPoint,
}

impl Claim {
    pub const ALL: [Claim; 8] = [
        Claim::Unbiased,
        Claim::VarianceGaussian,
        Claim::VarianceBound,
        Claim::InnerProductRate,
        Claim::ExpectedRate,
        Claim::GlyderRate,
        Claim::MeanGap,
        Claim::NoiselessFixedPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Unbiased => "unbiased",
            Claim::VarianceGaussian => "variance_gaussian",
            Claim::VarianceBound => "variance_bound",
            Claim::InnerProductRate => "thm2_rate",
            Claim::ExpectedRate => "thm3_rate",
            Claim::GlyderRate => "thm4_rate",
            Claim::MeanGap => "fig1_gap",
            Claim::NoiselessFixedPoint => "noiseless_fixed_point",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        let alias = match s {
            "inner_product_rate" => Some(Claim::InnerProductRate),
            "expected_rate" => Some(Claim::ExpectedRate),
            "glyder_rate" => Some(Claim::GlyderRate),
            "mean_gap" => Some(Claim::MeanGap),
            _ => None,
        };
        alias
            .or_else(|| Claim::ALL.into_iter().find(|c| c.name() == s))
            .ok_or_else(|| HarnessError::UnknownClaim(s.to_string()))
    }
}

/// Knobs for [`verify`]. Defaults reproduce the acceptance setups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub seed: u64,
    /// `‖∇f‖²` for the Monte-Carlo estimator claims.
    pub grad_norm_sq: f64,
    pub sigma_sq: f64,
    /// Gradients per batch for the estimator claims and the shard count for the gap.
    pub n: usize,
    pub dim: usize,
    pub trials: u64,
    /// Independent repetitions for the variance bound.
    pub repetitions: u64,
    /// Trials per repetition for the variance bound.
    pub trials_per_repetition: u64,
    /// Standard errors allowed for mean-type checks.
    pub z: f64,
    /// Relative tolerance on the Gaussian variance.
    pub variance_rel_tol: f64,

    pub rate_dim: usize,
    pub rate_sigma: f64,
    pub rate_steps: u64,
    pub rate_seeds: u64,
    /// Gradients per set for the estimated-stepsize rate.
    pub glyder_n: usize,
    pub oracle_rate_factor: f64,
    pub glyder_rate_factor: f64,

    /// Samples per shard for the gap claim.
    pub shard_size: usize,
    pub gap_repetitions: u64,

    pub noiseless_steps: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            seed: 0,
            grad_norm_sq: 1.0,
            sigma_sq: 1.0,
            n: 8,
            dim: 10,
            trials: 1_000_000,
            repetitions: 20,
            trials_per_repetition: 100_000,
            z: 3.0,
            variance_rel_tol: 0.05,
            rate_dim: 20,
            rate_sigma: 1.0,
            rate_steps: 500,
            rate_seeds: 50,
            glyder_n: 16,
            oracle_rate_factor: 1.1,
            glyder_rate_factor: 1.25,
            shard_size: 8,
            gap_repetitions: 1000,
            noiseless_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub claim: Claim,
    pub passed: bool,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for VerdictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, target {:.6e}, tolerance {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.claim,
            self.measured,
            self.target,
            self.tolerance,
            self.detail
        )
    }
}

pub fn verify(claim: Claim, params: &VerifyParams) -> HarnessResult<VerdictReport> {
    match claim {
        Claim::Unbiased => unbiased(params),
        Claim::VarianceGaussian => variance_gaussian_claim(params),
        Claim::VarianceBound => variance_bound_claim(params),
        Claim::InnerProductRate => rate(claim, SchedulerSpec::OracleInnerProduct, params),
        Claim::ExpectedRate => rate(claim, SchedulerSpec::OracleExpected, params),
        Claim::GlyderRate => rate(claim, SchedulerSpec::GlyderTheoretical { smoothness: None }, params),
        Claim::MeanGap => mean_gap(params),
        Claim::NoiselessFixedPoint => noiseless(params),
    }
}

fn gaussian_moments(p: &VerifyParams) -> HarnessResult<Moments> {
    Ok(monte_carlo_moments_with(NoiseModel::Gaussian, p.grad_norm_sq, p.sigma_sq, p.n, p.dim, p.trials, p.seed)?)
}

fn unbiased(p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let m = gaussian_moments(p)?;
    let se = m.std_error();
    Ok(VerdictReport {
        claim: Claim::Unbiased,
        passed: (m.mean - p.grad_norm_sq).abs() <= p.z * se,
        measured: m.mean,
        target: p.grad_norm_sq,
        tolerance: p.z * se,
        detail: format!("{} trials, standard error {se:.3e}", m.count),
    })
}

fn variance_gaussian_claim(p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let m = gaussian_moments(p)?;
    let target = variance_gaussian(p.grad_norm_sq, p.sigma_sq, p.n, p.dim);
    let exact = variance_gaussian_exact(p.grad_norm_sq, p.sigma_sq, p.n, p.dim);
    let rel = (m.variance - target).abs() / target;
    let rel_exact = (m.variance - exact).abs() / exact;
    Ok(VerdictReport {
        claim: Claim::VarianceGaussian,
        passed: rel <= p.variance_rel_tol,
        measured: m.variance,
        target,
        tolerance: p.variance_rel_tol,
        detail: format!(
            "relative error {rel:.3e}; against the exact {exact:.7} it is {rel_exact:.3e}; mean {:.6}",
            m.mean
        ),
    })
}

fn variance_bound_claim(p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let target = variance_bound(p.grad_norm_sq, p.sigma_sq, p.n);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for rep in 0..p.repetitions {
        let m = monte_carlo_moments_with(
            NoiseModel::Sphere,
            p.grad_norm_sq,
            p.sigma_sq,
            p.n,
            p.dim,
            p.trials_per_repetition,
            p.seed.wrapping_add(rep),
        )?;
        worst = worst.max(m.variance);
        violations += usize::from(m.variance > target);
    }
    Ok(VerdictReport {
        claim: Claim::VarianceBound,
        passed: violations == 0,
        measured: worst,
        target,
        tolerance: 0.0,
        detail: format!("largest of {} repetitions; {violations} above the bound", p.repetitions),
    })
}

fn rate(claim: Claim, scheduler: SchedulerSpec, p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let problem = ProblemSpec::quadratic(p.rate_dim, p.rate_sigma);
    let mut cfg = RunConfig::new(problem.clone(), scheduler);
    cfg.steps = p.rate_steps;
    cfg.seeds = (p.seed..p.seed + p.rate_seeds).collect();
    cfg.n = p.glyder_n;
    let handle = problem.build()?;
    let c = handle.constants();
    let l = c.require_smoothness()?;
    let r = c.require_initial_gap()?;
    let sigma = c.require_sigma()? / (handle.batch_size() as f64).sqrt();
    let base = 2.0 * l * r / p.rate_steps as f64;
    let (target, factor) = if claim == Claim::GlyderRate {
        (base + sigma / (p.glyder_n as f64).sqrt() * base.sqrt(), p.glyder_rate_factor)
    } else {
        (base + sigma * base.sqrt(), p.oracle_rate_factor)
    };
    let records = run_trials(&cfg)?;
    let mins: Vec<f64> = records
        .iter()
        .map(|rec| rec.summary.min_grad_norm_sq.unwrap_or(f64::INFINITY))
        .collect();
    let measured = mins.iter().sum::<f64>() / mins.len() as f64;
    Ok(VerdictReport {
        claim,
        passed: measured <= factor * target,
        measured,
        target,
        tolerance: factor,
        detail: format!(
            "mean over {} seeds of min ‖∇f‖², L={l}, R={r}, σ={sigma}, T={}",
            mins.len(),
            p.rate_steps
        ),
    })
}

/// Per-sample gradient variance `E‖∇f_i − ∇f‖²` under uniform sampling.
fn per_sample_variance(problem: &mut ProblemHandle, x: &[f64], full: &[f64]) -> HarnessResult<f64> {
    let m = problem.n_samples().ok_or_else(|| HarnessError::config("problem", "needs a finite dataset"))?;
    let mut acc = 0.0;
    for i in 0..m {
        let g = problem.stochastic_grad(x, &BatchSelector::Indices(vec![i]))?;
        acc += g.iter().zip(full).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    Ok(acc / m as f64)
}

fn mean_gap(p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let base = ProblemSpec::LogisticRegression {
        n_samples: 1000,
        dim: 10,
        batch_size: p.shard_size,
        seed: p.seed,
    }
    .build()?;
    let mut problem = base.branch(p.seed);
    let x = problem.initial_point().to_vec();
    let full = problem.full_grad(&x)?;
    let full_sq = norm_sq(&full);
    let k = p.n;
    let total = k * p.shard_size;
    let target_gap = per_sample_variance(&mut problem, &x, &full)? / total as f64;

    let (mut gaps, mut mus, mut means) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..p.gap_repetitions {
        let shards = shard_gradients(&mut problem, &x, &BatchSelector::Fresh(total), k)?;
        let est = estimate(&shards.batch, EstimatorMode::Normalized);
        let mean_sq = norm_sq(&shards.batch.mean());
        gaps.push(mean_sq - est.mu);
        mus.push(est.mu);
        means.push(mean_sq);
    }
    let (gap, mu, mean) = (Moments::from_samples(&gaps), Moments::from_samples(&mus), Moments::from_samples(&means));
    let gap_ok = (gap.mean - target_gap).abs() <= p.z * gap.std_error();
    let mu_ok = (mu.mean - full_sq).abs() <= p.z * mu.std_error();
    let mean_ok = (mean.mean - full_sq - target_gap).abs() <= p.z * mean.std_error() && mean.mean > full_sq;
    Ok(VerdictReport {
        claim: Claim::MeanGap,
        passed: gap_ok && mu_ok && mean_ok,
        measured: gap.mean,
        target: target_gap,
        tolerance: p.z * gap.std_error(),
        detail: format!(
            "‖∇f‖²={full_sq:.6e}; E[μ]={:.6e}±{:.2e} ({}); E[‖mean‖²]={:.6e}±{:.2e} ({})",
            mu.mean,
            mu.std_error(),
            if mu_ok { "unbiased" } else { "biased" },
            mean.mean,
            mean.std_error(),
            if mean_ok { "overshoots by the gap" } else { "gap mismatch" },
        ),
    })
}

fn noiseless(p: &VerifyParams) -> HarnessResult<VerdictReport> {
    let l = 2.0;
    let x0 = vec![1.0, 1.0];
    let problem = ProblemHandle::noisy_quadratic(2, &[2.0, 1.0], 0.0, NoiseModel::Gaussian, p.seed)?;

    // the two-set scheduler, whose stepsize should sit at 1/L
    let mut q = problem.branch(0);
    let mut x = x0;
    let mut path = Vec::new();
    let mut worst_step = 0.0f64;
    let mut final_sq = f64::NAN;
    let mut hit = None;
    for t in 1..=p.noiseless_steps {
        path.push(x.clone());
        let (next, rec) = glyder_theoretical_step(&mut q, &x, p.n, l, DirectionAggregation::Mean)?;
        worst_step = worst_step.max((rec.stepsize - 1.0 / l).abs());
        x = next;
        final_sq = norm_sq(&q.full_grad(&x)?);
        if hit.is_none() && final_sq < 1e-12 {
            hit = Some(t);
        }
    }

    // the raw practical ratio at every iterate of that path is (n−1)/n;
    // iterates of the path are dyadic, so equality is exact
    let mut q = problem.branch(1);
    let cfg = PracticalConfig::new(p.n, SmoothnessEstimator::constant(l)?);
    let state = GlyderState::new(0.1, 0.999, EmaConvention::History)?;
    let expect = (p.n as f64 - 1.0) / p.n as f64;
    let mut worst_ratio = 0.0f64;
    for x in path.iter().filter(|x| norm_sq(x) > 0.0) {
        let (_, _, rec) = glyder_practical_step(&state, &cfg, &mut q, x, DirectionSource::BatchGradient)?;
        worst_ratio = worst_ratio.max((rec.ratio - expect).abs());
    }
    let passed = worst_step == 0.0 && worst_ratio == 0.0 && hit.is_some();
    Ok(VerdictReport {
        claim: Claim::NoiselessFixedPoint,
        passed,
        measured: worst_step,
        target: 0.0,
        tolerance: 0.0,
        detail: format!(
            "max |η−1/L| = {worst_step:e}; max |ratio−(n−1)/n| = {worst_ratio:e}; \
             ‖∇f‖² < 1e-12 at step {}; final ‖∇f‖² = {final_sq:e}",
            hit.map_or_else(|| "never".to_string(), |t| t.to_string())
        ),
    })
}
