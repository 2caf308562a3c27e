//! The locally-optimal stepsize scheduler.
//!
//! Each step estimates `‖∇f‖²` and `‖∇f‖² + σ²/n` from `n` stochastic
//! gradients and moves with stepsize `(1/L)·(μ/γ)`:
//!
//! * the theoretical form draws two independent gradient sets, one for the
//!   estimate and one for the direction, with a known global `L`;
//! * the practical form reuses one set for both, estimates `L_t` per step and
//!   smooths the stepsize with an exponential moving average started at `η₀`.
//!   When the direction comes from an optimizer (momentum, Adam) the
//!   curvature is measured along that direction instead of the gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorMode, GradientBatch, NormEstimate};
use crate::linalg::{norm_sq, step};
use crate::optimizers::OptimizerState;
use crate::problems::{BatchSelector, ProblemHandle};
use crate::sharding::shard_gradients;
use crate::smoothness::SmoothnessEstimator;

/// How the `n` gradients combine into the descent direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionAggregation {
    #[default]
    Mean,
    Sum,
}

impl DirectionAggregation {
    pub fn combine(self, batch: &GradientBatch) -> Vec<f64> {
        match self {
            DirectionAggregation::Mean => batch.mean(),
            DirectionAggregation::Sum => batch.sum(),
        }
    }
}

/// Which side of the moving average `β` weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmaConvention {
    /// `η̂_t = (1−β)·η_t + β·η̂_{t−1}`: `β` weights the history.
    #[default]
    History,
    /// `η_t = (1−β)·η_{t−1} + β·η_inst`: `β` weights the new value.
    Instantaneous,
}

pub fn ema_update(prev: f64, instantaneous: f64, beta: f64, convention: EmaConvention) -> f64 {
    match convention {
        EmaConvention::History => (1.0 - beta) * instantaneous + beta * prev,
        EmaConvention::Instantaneous => (1.0 - beta) * prev + beta * instantaneous,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlyderState {
    /// Current smoothed stepsize.
    pub eta: f64,
    pub eta0: f64,
    pub beta: f64,
    pub step: u64,
    pub convention: EmaConvention,
}

impl GlyderState {
    pub fn new(eta0: f64, beta: f64, convention: EmaConvention) -> Result<Self> {
        if !(eta0 > 0.0 && eta0.is_finite()) {
            return Err(Error::invalid("eta0", format!("must be positive, got {eta0}")));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("must lie in [0, 1), got {beta}")));
        }
        Ok(Self { eta: eta0, eta0, beta, step: 0, convention })
    }

    fn advance(&self, instantaneous: f64) -> Self {
        Self {
            eta: ema_update(self.eta, instantaneous, self.beta, self.convention),
            step: self.step + 1,
            ..*self
        }
    }
}

/// What one scheduler step measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub estimate: NormEstimate,
    /// Ratio actually used, after any bias correction.
    pub ratio: f64,
    /// `ratio / L_t`, before averaging.
    pub instantaneous: f64,
    /// Stepsize applied to the direction.
    pub stepsize: f64,
    pub smoothness: f64,
}

/// One theoretical step from already-sampled gradient sets: `h` feeds the
/// estimate, `g` the direction.
pub fn theoretical_update(
    x: &[f64],
    g: &GradientBatch,
    h: &GradientBatch,
    l: f64,
    aggregation: DirectionAggregation,
) -> Result<(Vec<f64>, StepRecord)> {
    if !(l > 0.0) {
        return Err(Error::invalid("L", format!("must be positive, got {l}")));
    }
    crate::error::check_dim(x.len(), g.dim())?;
    crate::error::check_dim(x.len(), h.dim())?;
    let est = estimate(h, EstimatorMode::Normalized);
    let stepsize = est.ratio / l;
    let direction = aggregation.combine(g);
    let record = StepRecord {
        estimate: est,
        ratio: est.ratio,
        instantaneous: stepsize,
        stepsize,
        smoothness: l,
    };
    Ok((step(x, stepsize, &direction), record))
}

fn sample_gradients(problem: &mut ProblemHandle, x: &[f64], n: usize) -> Result<GradientBatch> {
    let sel = problem.fresh();
    let grads = (0..n).map(|_| problem.stochastic_grad(x, &sel)).collect::<Result<Vec<_>>>()?;
    GradientBatch::new(grads)
}

/// Samples `2n` stochastic gradients at `x` and takes one theoretical step.
pub fn glyder_theoretical_step(
    problem: &mut ProblemHandle,
    x: &[f64],
    n: usize,
    l: f64,
    aggregation: DirectionAggregation,
) -> Result<(Vec<f64>, StepRecord)> {
    if n < 2 {
        return Err(Error::TooFewGradients(n));
    }
    let g = sample_gradients(problem, x, n)?;
    let h = sample_gradients(problem, x, n)?;
    theoretical_update(x, &g, &h, l, aggregation)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PracticalConfig {
    /// Gradients per step; each is computed on `problem.batch_size()` samples.
    pub n: usize,
    pub smoothness: SmoothnessEstimator,
    pub mode: EstimatorMode,
    /// Multiply the raw-mode ratio by `n/(n−1)`, matching the normalized ratio.
    pub bias_correction: bool,
    pub aggregation: DirectionAggregation,
}

impl PracticalConfig {
    pub fn new(n: usize, smoothness: SmoothnessEstimator) -> Self {
        Self {
            n,
            smoothness,
            mode: EstimatorMode::Raw,
            bias_correction: false,
            aggregation: DirectionAggregation::Mean,
        }
    }
}

/// Where the practical step takes its descent direction from.
#[derive(Debug)]
pub enum DirectionSource<'a> {
    /// The aggregated batch gradient.
    BatchGradient,
    /// An optimizer fed with the aggregated batch gradient.
    Optimizer(&'a mut OptimizerState),
}

/// One practical step. The `n` gradients are shards of a single batch of
/// `n · batch_size` samples, which is also the batch used for the curvature.
pub fn glyder_practical_step(
    state: &GlyderState,
    cfg: &PracticalConfig,
    problem: &mut ProblemHandle,
    x: &[f64],
    direction: DirectionSource<'_>,
) -> Result<(Vec<f64>, GlyderState, StepRecord)> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::TooFewGradients(n));
    }
    let total = BatchSelector::Fresh(n * problem.batch_size());
    let shards = shard_gradients(problem, x, &total, n)?;
    let batch_sel = shards.selector();

    let est = estimate(&shards.batch, cfg.mode);
    let mut ratio = est.ratio;
    if cfg.bias_correction && cfg.mode == EstimatorMode::Raw {
        ratio *= n as f64 / (n as f64 - 1.0);
    }
    let g = cfg.aggregation.combine(&shards.batch);
    let d = match direction {
        DirectionSource::BatchGradient => g,
        DirectionSource::Optimizer(opt) => opt.direction(&g)?,
    };
    let mean_grad = shards.batch.mean();
    let l_t = if norm_sq(&d) == 0.0 {
        cfg.smoothness.floor
    } else {
        cfg.smoothness.estimate(problem, x, &d, &mean_grad, &batch_sel)?
    };
    let instantaneous = ratio / l_t;
    let next = state.advance(instantaneous);
    let record = StepRecord { estimate: est, ratio, instantaneous, stepsize: next.eta, smoothness: l_t };
    Ok((step(x, next.eta, &d), next, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::optimizers::OptimizerKind;
    use crate::smoothness::CurvatureMode;

    fn quad(sigma: f64) -> ProblemHandle {
        ProblemHandle::noisy_quadratic(2, &[2.0, 1.0], sigma, NoiseModel::Gaussian, 11).unwrap()
    }

    #[test]
    fn ema_conventions() {
        assert_eq!(ema_update(0.3, 0.7, 0.0, EmaConvention::History), 0.7);
        let heavy = ema_update(1.0, 0.0, 1.0 - 1e-12, EmaConvention::History);
        assert!((heavy - 1.0).abs() < 1e-11);
        let v = ema_update(0.1, 0.5, 0.999, EmaConvention::Instantaneous);
        assert!((v - 0.4996).abs() < 1e-15);
        let h = ema_update(0.1, 0.5, 0.999, EmaConvention::History);
        assert!((h - 0.1004).abs() < 1e-15);
    }

    #[test]
    fn state_validation() {
        assert!(GlyderState::new(0.0, 0.9, EmaConvention::History).is_err());
        assert!(GlyderState::new(0.1, 1.0, EmaConvention::History).is_err());
        let s = GlyderState::new(0.1, 0.999, EmaConvention::History).unwrap();
        assert_eq!((s.eta, s.step), (0.1, 0));
    }

    #[test]
    fn noiseless_theoretical_step() {
        let mut p = quad(0.0);
        let (x1, rec) = glyder_theoretical_step(&mut p, &[1.0, 1.0], 4, 2.0, DirectionAggregation::Mean).unwrap();
        assert_eq!(rec.estimate.ratio, 1.0);
        assert_eq!(rec.stepsize, 0.5);
        assert_eq!(x1, vec![0.0, 0.5]);
    }

    #[test]
    fn orthogonal_estimate_gradients_freeze_the_iterate() {
        let g = GradientBatch::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let h = GradientBatch::new(vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let (x1, rec) = theoretical_update(&[0.4, -0.2], &g, &h, 1.0, DirectionAggregation::Mean).unwrap();
        assert_eq!(rec.stepsize, 0.0);
        assert_eq!(x1, vec![0.4, -0.2]);
    }

    #[test]
    fn sum_aggregation_scales_the_step() {
        let g = GradientBatch::new(vec![vec![1.0, 0.0]; 4]).unwrap();
        let (xm, _) = theoretical_update(&[1.0, 0.0], &g, &g, 1.0, DirectionAggregation::Mean).unwrap();
        let (xs, _) = theoretical_update(&[1.0, 0.0], &g, &g, 1.0, DirectionAggregation::Sum).unwrap();
        assert_eq!(xm, vec![0.0, 0.0]);
        assert_eq!(xs, vec![-3.0, 0.0]);
    }

    #[test]
    fn noiseless_practical_ratio() {
        let mut p = quad(0.0);
        let s = GlyderState::new(0.1, 0.999, EmaConvention::History).unwrap();
        let cfg = PracticalConfig::new(8, SmoothnessEstimator::constant(2.0).unwrap());
        let (_, next, rec) =
            glyder_practical_step(&s, &cfg, &mut p, &[1.0, 1.0], DirectionSource::BatchGradient).unwrap();
        assert_eq!(rec.ratio, 0.875);
        assert_eq!(rec.instantaneous, 7.0 / 16.0);
        assert_eq!(next.step, 1);
        assert_eq!(next.eta, 0.001 * (7.0 / 16.0) + 0.999 * 0.1);
    }

    #[test]
    fn bias_correction_restores_unit_ratio() {
        let mut p = quad(0.0);
        let s = GlyderState::new(0.1, 0.0, EmaConvention::History).unwrap();
        let mut cfg = PracticalConfig::new(8, SmoothnessEstimator::constant(2.0).unwrap());
        cfg.bias_correction = true;
        let (x1, _, rec) =
            glyder_practical_step(&s, &cfg, &mut p, &[1.0, 1.0], DirectionSource::BatchGradient).unwrap();
        assert_eq!(rec.ratio, 1.0);
        assert_eq!(x1, vec![0.0, 0.5]);
    }

    #[test]
    fn optimizer_sgd_path_matches_plain_path() {
        let s = GlyderState::new(0.05, 0.9, EmaConvention::History).unwrap();
        let cfg = PracticalConfig::new(4, SmoothnessEstimator::proj_1d(CurvatureMode::Unnormalized));
        let mut p1 = ProblemHandle::logistic_regression(100, 5, 3, 2).unwrap();
        let mut p2 = p1.clone();
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 5);
        let (mut x1, mut s1) = (vec![0.1; 5], s);
        let (mut x2, mut s2) = (vec![0.1; 5], s);
        for _ in 0..20 {
            let (a, b, _) = glyder_practical_step(&s1, &cfg, &mut p1, &x1, DirectionSource::BatchGradient).unwrap();
            let (c, d, _) = glyder_practical_step(&s2, &cfg, &mut p2, &x2, DirectionSource::Optimizer(&mut opt)).unwrap();
            (x1, s1, x2, s2) = (a, b, c, d);
            assert_eq!(x1, x2);
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn too_few_gradients() {
        let mut p = quad(1.0);
        let s = GlyderState::new(0.1, 0.9, EmaConvention::History).unwrap();
        let cfg = PracticalConfig::new(1, SmoothnessEstimator::gnb());
        let r = glyder_practical_step(&s, &cfg, &mut p, &[1.0, 1.0], DirectionSource::BatchGradient);
        assert!(matches!(r, Err(Error::TooFewGradients(1))));
        assert!(glyder_theoretical_step(&mut p, &[1.0, 1.0], 1, 1.0, DirectionAggregation::Mean).is_err());
    }
}
