use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::run_trial_on;
use super::{HarnessError, HarnessResult, RunConfig, RunRecord, SchedulerSpec};
use crate::linalg::logspace;

/// 20 initial stepsizes, log-evenly spaced over `[1e-3, 1e2]`.
pub fn default_lr_grid() -> Vec<f64> {
    logspace(1e-3, 1e2, 20)
}

/// Squash steps tried for the rsqrt schedule.
pub fn default_squash_grid() -> Vec<f64> {
    vec![0.5, 1.0, 5.0, 10.0, 15.0, 50.0, 100.0, 200.0, 500.0, 1000.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    FinalLoss,
    MinGradNormSq,
}

impl SelectionMetric {
    /// Lower is better; diverged runs score `+∞`.
    pub fn score(self, rec: &RunRecord) -> f64 {
        let v = match self {
            SelectionMetric::FinalLoss => rec.summary.final_loss,
            SelectionMetric::MinGradNormSq => rec.summary.min_grad_norm_sq.unwrap_or(f64::NAN),
        };
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub eta0: Vec<f64>,
    /// Only consulted for rsqrt; empty keeps the template's squash.
    #[serde(default)]
    pub squash: Vec<f64>,
}

impl SweepGrid {
    pub fn lr_only(eta0: Vec<f64>) -> Self {
        Self { eta0, squash: vec![] }
    }

    /// The default protocol for the given scheduler.
    pub fn default_for(scheduler: &SchedulerSpec) -> Self {
        let squash = match scheduler {
            SchedulerSpec::Rsqrt { .. } => default_squash_grid(),
            _ => vec![],
        };
        Self { eta0: default_lr_grid(), squash }
    }

    pub fn points(&self, template: &RunConfig) -> Vec<GridPoint> {
        let rsqrt = matches!(template.scheduler, SchedulerSpec::Rsqrt { .. });
        let mut pts = Vec::new();
        for &eta0 in &self.eta0 {
            if rsqrt && !self.squash.is_empty() {
                pts.extend(self.squash.iter().map(|&s| GridPoint { eta0, squash: Some(s) }));
            } else {
                pts.push(GridPoint { eta0, squash: None });
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub eta0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squash: Option<f64>,
}

impl GridPoint {
    pub fn apply(&self, template: &RunConfig) -> RunConfig {
        let mut cfg = template.clone();
        cfg.eta0 = self.eta0;
        if let (Some(s), SchedulerSpec::Rsqrt { squash }) = (self.squash, &mut cfg.scheduler) {
            *squash = s;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub point: GridPoint,
    pub score: f64,
    pub summary: super::RunSummary,
}

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub final_loss_mean: f64,
    pub final_loss_std: f64,
    pub min_grad_norm_sq_mean: f64,
    pub min_grad_norm_sq_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(records: &[RunRecord]) -> Aggregate {
    let losses: Vec<f64> = records.iter().map(|r| r.summary.final_loss).collect();
    let mins: Vec<f64> =
        records.iter().map(|r| r.summary.min_grad_norm_sq.unwrap_or(f64::NAN)).collect();
    let (final_loss_mean, final_loss_std) = mean_std(&losses);
    let (min_grad_norm_sq_mean, min_grad_norm_sq_std) = mean_std(&mins);
    Aggregate { final_loss_mean, final_loss_std, min_grad_norm_sq_mean, min_grad_norm_sq_std }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metric: SelectionMetric,
    pub selection_seed: u64,
    pub grid: Vec<GridResult>,
    pub best: GridPoint,
    pub best_index: usize,
    /// The winner rerun on every seed of the template.
    pub records: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

/// Scores every grid point on `selection_seed`, then reruns the winner on the
/// template's seeds. Ties go to the earlier grid point.
pub fn sweep(
    template: &RunConfig,
    grid: &SweepGrid,
    metric: SelectionMetric,
    selection_seed: u64,
) -> HarnessResult<SweepResult> {
    template.validate()?;
    let points = grid.points(template);
    if points.is_empty() {
        return Err(HarnessError::config("grid", "must contain at least one point"));
    }
    let base = template.problem.build()?;
    let scored: Vec<GridResult> = points
        .par_iter()
        .map(|pt| {
            let cfg = pt.apply(template);
            cfg.validate()?;
            let rec = run_trial_on(&cfg, &base, selection_seed)?;
            Ok(GridResult { point: *pt, score: metric.score(&rec), summary: rec.summary })
        })
        .collect::<HarnessResult<_>>()?;
    let best_index = scored
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.score < scored[b].score { i } else { b });
    let best = scored[best_index].point;
    let winner = best.apply(template);
    let records: Vec<RunRecord> = winner
        .seeds
        .par_iter()
        .map(|&s| run_trial_on(&winner, &base, s))
        .collect::<HarnessResult<_>>()?;
    let aggregate = aggregate(&records);
    Ok(SweepResult { metric, selection_seed, grid: scored, best, best_index, records, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_trials, ProblemSpec};

    fn template() -> RunConfig {
        let mut cfg = RunConfig::new(ProblemSpec::quadratic(6, 0.5), SchedulerSpec::Constant);
        cfg.steps = 30;
        cfg.seeds = vec![4, 5, 6];
        cfg
    }

    #[test]
    fn singleton_grid_matches_plain_trials() {
        let t = template();
        let r = sweep(&t, &SweepGrid::lr_only(vec![t.eta0]), SelectionMetric::FinalLoss, 99).unwrap();
        let direct = run_trials(&t).unwrap();
        assert_eq!(r.records, direct);
    }

    #[test]
    fn best_is_the_exhaustive_minimum() {
        let t = template();
        let grid = SweepGrid::lr_only(logspace(1e-2, 3.0, 7));
        let r = sweep(&t, &grid, SelectionMetric::FinalLoss, 1).unwrap();
        let brute = r
            .grid
            .iter()
            .min_by(|a, b| a.score.total_cmp(&b.score))
            .unwrap();
        assert_eq!(r.best, brute.point);
    }

    #[test]
    fn rsqrt_grid_is_a_product() {
        let mut t = template();
        t.scheduler = SchedulerSpec::Rsqrt { squash: 1.0 };
        let g = SweepGrid::default_for(&t.scheduler);
        assert_eq!(g.points(&t).len(), 200);
    }

    #[test]
    fn aggregate_uses_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
