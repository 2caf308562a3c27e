use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult, RunConfig, SchedulerSpec};
use crate::linalg::{norm_sq, step};
use crate::optimizers::{OptimizerKind, OptimizerState};
use crate::problems::{BatchSelector, ProblemHandle};
use crate::schedulers::{
    glyder_practical_step, glyder_theoretical_step, oracle_expected_stepsize,
    oracle_inner_product_stepsize, DirectionSource, GlyderState,
};

/// One row of a trajectory. Row `t` describes the move from `x_{t−1}` to
/// `x_t`; `loss` and `grad_norm_sq_true` are evaluated at `x_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: u64,
    pub loss: f64,
    pub grad_norm_sq_true: Option<f64>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub stepsize: f64,
    pub smoothness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub min_grad_norm_sq: Option<f64>,
    pub final_loss: f64,
}

/// Equality ignores `wall_time`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub scheduler: String,
    pub steps: Vec<StepRow>,
    pub summary: RunSummary,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.scheduler == other.scheduler
            && self.steps == other.steps
            && self.summary == other.summary
    }
}

impl RunRecord {
    pub fn from_steps(seed: u64, scheduler: impl Into<String>, steps: Vec<StepRow>) -> Self {
        let min_grad_norm_sq = steps
            .iter()
            .filter_map(|r| r.grad_norm_sq_true)
            .filter(|v| !v.is_nan())
            .reduce(f64::min);
        let final_loss = steps.last().map_or(f64::NAN, |r| r.loss);
        Self {
            seed,
            scheduler: scheduler.into(),
            steps,
            summary: RunSummary { min_grad_norm_sq, final_loss },
            wall_time: Duration::ZERO,
        }
    }

    pub fn column(&self, f: impl Fn(&StepRow) -> Option<f64>) -> Vec<Option<f64>> {
        self.steps.iter().map(f).collect()
    }
}

enum Rule {
    InnerProduct { l: f64 },
    Expected { l: f64, sigma_sq: f64 },
    Theoretical { l: f64 },
    Practical { state: GlyderState, cfg: crate::schedulers::PracticalConfig },
    Baseline(crate::schedulers::BaselineSchedule),
}

fn missing(field: &str, e: crate::Error) -> HarnessError {
    HarnessError::config(field, e.to_string())
}

fn build_rule(cfg: &RunConfig, problem: &ProblemHandle) -> HarnessResult<Rule> {
    let c = problem.constants();
    Ok(match &cfg.scheduler {
        SchedulerSpec::OracleInnerProduct => {
            Rule::InnerProduct { l: c.require_smoothness().map_err(|e| missing("problem", e))? }
        }
        SchedulerSpec::OracleExpected => {
            let l = c.require_smoothness().map_err(|e| missing("problem", e))?;
            let sigma = c.require_sigma().map_err(|e| missing("problem", e))?;
            // σ is per sample; one stochastic gradient averages `batch_size` samples
            Rule::Expected { l, sigma_sq: sigma * sigma / problem.batch_size() as f64 }
        }
        SchedulerSpec::GlyderTheoretical { smoothness } => {
            let l = match smoothness {
                Some(l) => *l,
                None => c.require_smoothness().map_err(|e| missing("scheduler.smoothness", e))?,
            };
            if !(l > 0.0) {
                return Err(HarnessError::config("scheduler.smoothness", "must be positive"));
            }
            Rule::Theoretical { l }
        }
        SchedulerSpec::GlyderPractical { beta, ema_convention, .. } => {
            let state = GlyderState::new(cfg.eta0, *beta, *ema_convention)
                .map_err(|e| HarnessError::config("scheduler", e.to_string()))?;
            let pc = cfg.scheduler.practical(cfg.n, cfg.direction, problem)?.expect("practical spec");
            Rule::Practical { state, cfg: pc }
        }
        spec => {
            let b = spec.baseline(cfg.eta0, cfg.steps).expect("baseline spec");
            b.validate().map_err(|e| HarnessError::config("scheduler", e.to_string()))?;
            Rule::Baseline(b)
        }
    })
}

/// Runs one trial. Deterministic in `(cfg, seed)`.
pub fn run_trial(cfg: &RunConfig, seed: u64) -> HarnessResult<RunRecord> {
    cfg.validate()?;
    let base = cfg.problem.build()?;
    run_trial_on(cfg, &base, seed)
}

/// Runs every seed of `cfg`, in parallel, on a shared problem instance.
pub fn run_trials(cfg: &RunConfig) -> HarnessResult<Vec<RunRecord>> {
    cfg.validate()?;
    let base = cfg.problem.build()?;
    cfg.seeds.par_iter().map(|&s| run_trial_on(cfg, &base, s)).collect()
}

pub(crate) fn run_trial_on(cfg: &RunConfig, base: &ProblemHandle, seed: u64) -> HarnessResult<RunRecord> {
    let started = Instant::now();
    let mut problem = base.branch(seed);
    let mut rule = build_rule(cfg, &problem)?;
    let mut optimizer = OptimizerState::new(cfg.optimizer, problem.dim());
    let plain_sgd = cfg.optimizer == OptimizerKind::Sgd;
    let mut x = problem.initial_point().to_vec();
    let mut rows = Vec::with_capacity(cfg.steps as usize);

    for t in 1..=cfg.steps {
        let (next, stepsize, mu, gamma, smoothness) = match &mut rule {
            Rule::InnerProduct { l } => {
                let g = problem.stochastic_grad(&x, &problem.fresh())?;
                let eta = if norm_sq(&g) == 0.0 {
                    0.0
                } else {
                    oracle_inner_product_stepsize(&problem.full_grad(&x)?, &g, *l)?
                };
                (step(&x, eta, &g), eta, None, None, Some(*l))
            }
            Rule::Expected { l, sigma_sq } => {
                let g = problem.stochastic_grad(&x, &problem.fresh())?;
                let eta = oracle_expected_stepsize(norm_sq(&problem.full_grad(&x)?), *sigma_sq, *l)?;
                (step(&x, eta, &g), eta, None, None, Some(*l))
            }
            Rule::Theoretical { l } => {
                let (next, rec) = glyder_theoretical_step(&mut problem, &x, cfg.n, *l, cfg.direction)?;
                (next, rec.stepsize, Some(rec.estimate.mu), Some(rec.estimate.gamma), Some(*l))
            }
            Rule::Practical { state, cfg: pc } => {
                let source = if plain_sgd {
                    DirectionSource::BatchGradient
                } else {
                    DirectionSource::Optimizer(&mut optimizer)
                };
                let (next, s, rec) = glyder_practical_step(state, pc, &mut problem, &x, source)?;
                *state = s;
                (next, rec.stepsize, Some(rec.estimate.mu), Some(rec.estimate.gamma), Some(rec.smoothness))
            }
            Rule::Baseline(b) => {
                let sel = BatchSelector::Fresh(cfg.n * problem.batch_size());
                let g = problem.stochastic_grad(&x, &sel)?;
                let d = optimizer.direction(&g)?;
                let eta = b.stepsize(t - 1)?;
                (step(&x, eta, &d), eta, None, None, None)
            }
        };
        x = next;
        rows.push(StepRow {
            step: t,
            loss: problem.full_loss(&x)?,
            grad_norm_sq_true: Some(norm_sq(&problem.full_grad(&x)?)),
            mu,
            gamma,
            stepsize,
            smoothness,
        });
    }
    let mut rec = RunRecord::from_steps(seed, cfg.scheduler.name(), rows);
    rec.wall_time = started.elapsed();
    Ok(rec)
}
