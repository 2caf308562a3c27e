//! Driving momentum and Adam with the practical scheduler: the optimizer
//! supplies the direction and the curvature is measured along it.
//!
//! Both curvature normalizations are shown; the unnormalized one shrinks with
//! `‖d‖²` and lets the stepsize run away once the direction gets small.

use glyder::harness::{run_trial, ProblemSpec, RunConfig, SchedulerSpec, SmoothnessSpec};
use glyder::optimizers::OptimizerKind;
use glyder::smoothness::CurvatureMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (optimizer, mode) in [OptimizerKind::Sgd, OptimizerKind::momentum(), OptimizerKind::adam()]
        .into_iter()
        .flat_map(|o| [(o, CurvatureMode::Unnormalized), (o, CurvatureMode::Directional)])
    {
        let smoothness = SmoothnessSpec { curvature_mode: mode, ..SmoothnessSpec::default() };
        let mut cfg = RunConfig::new(ProblemSpec::mlp(), SchedulerSpec::glyder_practical(smoothness));
        cfg.optimizer = optimizer;
        cfg.steps = 300;
        cfg.eta0 = 0.01;
        let rec = run_trial(&cfg, 0)?;
        let last = rec.steps.last().expect("at least one step");
        println!(
            "{:<10} {:<13} final loss {:<14.4} final η {:.3e}",
            format!("{:?}", optimizer).split_whitespace().next().unwrap_or("?"),
            format!("{mode:?}"),
            rec.summary.final_loss,
            last.stepsize
        );
    }
    Ok(())
}
