//! Run configuration, readable from TOML.
//!
//! ```toml
//! n = 8
//! steps = 500
//! seeds = [0, 1, 2, 3, 4]
//! eta0 = 0.1
//! direction = "mean"            # or "sum"
//!
//! [problem]
//! kind = "noisy_quadratic"      # | "logistic_regression" | "mlp_classifier"
//! dim = 20
//! sigma = 1.0
//!
//! [scheduler]
//! kind = "glyder_practical"     # | "glyder_theoretical" | "oracle_inner_product"
//!                               # | "oracle_expected" | "constant" | "cosine" | "rsqrt"
//! beta = 0.999
//! ema_convention = "history"    # or "instantaneous"
//! smoothness = { method = "proj1d", curvature_mode = "unnormalized" }
//!
//! [optimizer]
//! kind = "sgd"                  # | "momentum" | "adam"
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult};
use crate::estimators::EstimatorMode;
use crate::noise::NoiseModel;
use crate::optimizers::OptimizerKind;
use crate::problems::ProblemHandle;
use crate::schedulers::{BaselineSchedule, DirectionAggregation, EmaConvention, PracticalConfig};
use crate::smoothness::{CurvatureMode, SmoothnessEstimator, DEFAULT_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    NoisyQuadratic {
        #[serde(default = "defaults::quad_dim")]
        dim: usize,
        /// Defaults to `k/dim` for `k = 1..=dim`, so `L = 1`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eigenvalues: Option<Vec<f64>>,
        #[serde(default = "defaults::one")]
        sigma: f64,
        #[serde(default)]
        noise: NoiseModel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_point: Option<Vec<f64>>,
        #[serde(default)]
        seed: u64,
    },
    LogisticRegression {
        #[serde(default = "defaults::logistic_samples")]
        n_samples: usize,
        #[serde(default = "defaults::logistic_dim")]
        dim: usize,
        #[serde(default = "defaults::batch")]
        batch_size: usize,
        #[serde(default)]
        seed: u64,
    },
    MlpClassifier {
        #[serde(default = "defaults::mlp_layers")]
        layer_sizes: Vec<usize>,
        #[serde(default = "defaults::mlp_samples")]
        n_samples: usize,
        #[serde(default = "defaults::batch")]
        batch_size: usize,
        #[serde(default)]
        seed: u64,
    },
}

mod defaults {
    pub fn quad_dim() -> usize {
        20
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn logistic_samples() -> usize {
        1000
    }
    pub fn logistic_dim() -> usize {
        10
    }
    pub fn batch() -> usize {
        8
    }
    pub fn mlp_layers() -> Vec<usize> {
        vec![2, 16, 3]
    }
    pub fn mlp_samples() -> usize {
        256
    }
    pub fn n() -> usize {
        8
    }
    pub fn steps() -> u64 {
        500
    }
    pub fn seeds() -> Vec<u64> {
        vec![0, 1, 2, 3, 4]
    }
    pub fn eta0() -> f64 {
        0.1
    }
    pub fn beta() -> f64 {
        0.999
    }
    pub fn floor() -> f64 {
        super::DEFAULT_FLOOR
    }
    pub fn squash() -> f64 {
        100.0
    }
    pub fn sgd() -> crate::optimizers::OptimizerKind {
        crate::optimizers::OptimizerKind::Sgd
    }
}

impl ProblemSpec {
    pub fn quadratic(dim: usize, sigma: f64) -> Self {
        ProblemSpec::NoisyQuadratic {
            dim,
            eigenvalues: None,
            sigma,
            noise: NoiseModel::Gaussian,
            initial_point: None,
            seed: 0,
        }
    }

    pub fn logistic() -> Self {
        ProblemSpec::LogisticRegression {
            n_samples: defaults::logistic_samples(),
            dim: defaults::logistic_dim(),
            batch_size: defaults::batch(),
            seed: 0,
        }
    }

    pub fn mlp() -> Self {
        ProblemSpec::MlpClassifier {
            layer_sizes: defaults::mlp_layers(),
            n_samples: defaults::mlp_samples(),
            batch_size: defaults::batch(),
            seed: 0,
        }
    }

    pub fn build(&self) -> HarnessResult<ProblemHandle> {
        let p = match self {
            ProblemSpec::NoisyQuadratic { dim, eigenvalues, sigma, noise, initial_point, seed } => {
                let eig = match eigenvalues {
                    Some(e) => e.clone(),
                    None => (1..=*dim).map(|k| k as f64 / *dim as f64).collect(),
                };
                if eig.len() != *dim {
                    return Err(HarnessError::config(
                        "problem.eigenvalues",
                        format!("expected {dim} values, got {}", eig.len()),
                    ));
                }
                let p = ProblemHandle::noisy_quadratic(*dim, &eig, *sigma, *noise, *seed)
                    .map_err(|e| HarnessError::config("problem", e.to_string()))?;
                match initial_point {
                    Some(x0) => p
                        .with_initial_point(x0.clone())
                        .map_err(|e| HarnessError::config("problem.initial_point", e.to_string()))?,
                    None => p,
                }
            }
            ProblemSpec::LogisticRegression { n_samples, dim, batch_size, seed } => {
                ProblemHandle::logistic_regression(*n_samples, *dim, *batch_size, *seed)
                    .map_err(|e| HarnessError::config("problem", e.to_string()))?
            }
            ProblemSpec::MlpClassifier { layer_sizes, n_samples, batch_size, seed } => {
                ProblemHandle::mlp_classifier(layer_sizes, *n_samples, *batch_size, *seed)
                    .map_err(|e| HarnessError::config("problem", e.to_string()))?
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessMethod {
    /// The problem's known `L`, or `value` when given.
    Constant,
    #[default]
    Proj1d,
    Gnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessSpec {
    #[serde(default)]
    pub method: SmoothnessMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default)]
    pub curvature_mode: CurvatureMode,
    #[serde(default = "defaults::floor")]
    pub floor: f64,
}

impl Default for SmoothnessSpec {
    fn default() -> Self {
        Self {
            method: SmoothnessMethod::Proj1d,
            value: None,
            curvature_mode: CurvatureMode::Unnormalized,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl SmoothnessSpec {
    pub fn resolve(&self, problem: &ProblemHandle) -> HarnessResult<SmoothnessEstimator> {
        let bad = |e: crate::Error| HarnessError::config("scheduler.smoothness", e.to_string());
        let est = match self.method {
            SmoothnessMethod::Constant => {
                let l = match self.value {
                    Some(v) => v,
                    None => problem.constants().require_smoothness().map_err(bad)?,
                };
                SmoothnessEstimator::constant(l).map_err(bad)?
            }
            SmoothnessMethod::Proj1d => SmoothnessEstimator::proj_1d(self.curvature_mode),
            SmoothnessMethod::Gnb => SmoothnessEstimator::gnb(),
        };
        est.with_floor(self.floor).map_err(bad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchedulerSpec {
    /// `⟨∇f, g⟩/(L‖g‖²)` along a single stochastic gradient. Needs `∇f` and `L`.
    OracleInnerProduct,
    /// `(1/L)·‖∇f‖²/(‖∇f‖² + σ²)` along a single stochastic gradient.
    OracleExpected,
    GlyderTheoretical {
        /// Defaults to the problem's `L`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smoothness: Option<f64>,
    },
    GlyderPractical {
        #[serde(default)]
        smoothness: SmoothnessSpec,
        #[serde(default = "defaults::beta")]
        beta: f64,
        #[serde(default)]
        ema_convention: EmaConvention,
        #[serde(default)]
        estimator: EstimatorMode,
        #[serde(default)]
        bias_correction: bool,
    },
    Constant,
    Cosine {
        /// Defaults to the run length.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
    },
    Rsqrt {
        #[serde(default = "defaults::squash")]
        squash: f64,
    },
}

impl SchedulerSpec {
    pub fn glyder_practical(smoothness: SmoothnessSpec) -> Self {
        SchedulerSpec::GlyderPractical {
            smoothness,
            beta: defaults::beta(),
            ema_convention: EmaConvention::History,
            estimator: EstimatorMode::Raw,
            bias_correction: false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchedulerSpec::OracleInnerProduct => "oracle-inner-product",
            SchedulerSpec::OracleExpected => "oracle-expected",
            SchedulerSpec::GlyderTheoretical { .. } => "glyder-theoretical",
            SchedulerSpec::GlyderPractical { .. } => "glyder-practical",
            SchedulerSpec::Constant => "constant",
            SchedulerSpec::Cosine { .. } => "cosine",
            SchedulerSpec::Rsqrt { .. } => "rsqrt",
        }
    }

    pub fn uses_eta0(&self) -> bool {
        matches!(
            self,
            SchedulerSpec::GlyderPractical { .. }
                | SchedulerSpec::Constant
                | SchedulerSpec::Cosine { .. }
                | SchedulerSpec::Rsqrt { .. }
        )
    }

    pub(crate) fn baseline(&self, eta0: f64, steps: u64) -> Option<BaselineSchedule> {
        match *self {
            SchedulerSpec::Constant => Some(BaselineSchedule::Constant { eta0 }),
            SchedulerSpec::Cosine { horizon } => {
                Some(BaselineSchedule::Cosine { eta0, horizon: horizon.unwrap_or(steps) })
            }
            SchedulerSpec::Rsqrt { squash } => Some(BaselineSchedule::Rsqrt { eta0, squash }),
            _ => None,
        }
    }

    pub(crate) fn practical(
        &self,
        n: usize,
        direction: DirectionAggregation,
        problem: &ProblemHandle,
    ) -> HarnessResult<Option<PracticalConfig>> {
        match self {
            SchedulerSpec::GlyderPractical { smoothness, estimator, bias_correction, .. } => {
                let mut cfg = PracticalConfig::new(n, smoothness.resolve(problem)?);
                cfg.mode = *estimator;
                cfg.bias_correction = *bias_correction;
                cfg.aggregation = direction;
                Ok(Some(cfg))
            }
            _ => Ok(None),
        }
    }
}

/// Everything needed to reproduce a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub scheduler: SchedulerSpec,
    #[serde(default = "defaults::sgd")]
    pub optimizer: OptimizerKind,
    /// Stochastic gradients per step.
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::steps")]
    pub steps: u64,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "defaults::eta0")]
    pub eta0: f64,
    #[serde(default)]
    pub direction: DirectionAggregation,
}

impl RunConfig {
    pub fn new(problem: ProblemSpec, scheduler: SchedulerSpec) -> Self {
        Self {
            problem,
            scheduler,
            optimizer: OptimizerKind::Sgd,
            n: defaults::n(),
            steps: defaults::steps(),
            seeds: defaults::seeds(),
            eta0: defaults::eta0(),
            direction: DirectionAggregation::Mean,
        }
    }

    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.steps < 1 {
            return Err(HarnessError::config("steps", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::config("seeds", "must not be empty"));
        }
        if self.scheduler.uses_eta0() && !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(HarnessError::config("eta0", format!("must be positive, got {}", self.eta0)));
        }
        let needs_n = matches!(
            self.scheduler,
            SchedulerSpec::GlyderPractical { .. } | SchedulerSpec::GlyderTheoretical { .. }
        );
        if needs_n && self.n < 2 {
            return Err(HarnessError::config("n", format!("must be at least 2, got {}", self.n)));
        }
        if self.n < 1 {
            return Err(HarnessError::config("n", "must be at least 1"));
        }
        let sgd_only = matches!(
            self.scheduler,
            SchedulerSpec::OracleInnerProduct
                | SchedulerSpec::OracleExpected
                | SchedulerSpec::GlyderTheoretical { .. }
        );
        if sgd_only && self.optimizer != OptimizerKind::Sgd {
            return Err(HarnessError::config(
                "optimizer",
                format!("the {} scheduler only drives plain SGD", self.scheduler.name()),
            ));
        }
        match &self.scheduler {
            SchedulerSpec::GlyderPractical { beta, .. } if !(0.0..1.0).contains(beta) => {
                return Err(HarnessError::config("scheduler.beta", format!("must lie in [0, 1), got {beta}")));
            }
            SchedulerSpec::Rsqrt { squash } if !(*squash > 0.0) => {
                return Err(HarnessError::config("scheduler.squash", "must be positive"));
            }
            SchedulerSpec::Cosine { horizon: Some(h) } if *h < self.steps.saturating_sub(1).max(1) => {
                return Err(HarnessError::config(
                    "scheduler.horizon",
                    format!("{h} is shorter than the run of {} steps", self.steps),
                ));
            }
            _ => {}
        }
        match &self.optimizer {
            OptimizerKind::Momentum { momentum } if !(0.0..1.0).contains(momentum) => {
                return Err(HarnessError::config("optimizer.momentum", "must lie in [0, 1)"));
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                if !(0.0..1.0).contains(beta1) || !(0.0..1.0).contains(beta2) || !(*eps > 0.0) {
                    return Err(HarnessError::config("optimizer", "Adam needs β₁, β₂ in [0, 1) and ε > 0"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
