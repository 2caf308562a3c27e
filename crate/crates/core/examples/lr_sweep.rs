//! Tunes `η₀` for the practical scheduler and for a constant stepsize on the
//! tiny MLP, then reruns each winner over five seeds.
//!
//! ```text
//! cargo run --release --example lr_sweep [steps]
//! ```

use glyder::harness::{
    sweep, ProblemSpec, RunConfig, SchedulerSpec, SelectionMetric, SmoothnessSpec, SweepGrid,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps: u64 = std::env::args().nth(1).map_or(Ok(300), |s| s.parse())?;
    let schedulers = [
        SchedulerSpec::glyder_practical(SmoothnessSpec::default()),
        SchedulerSpec::Constant,
        SchedulerSpec::Cosine { horizon: None },
    ];
    for scheduler in schedulers {
        let mut cfg = RunConfig::new(ProblemSpec::mlp(), scheduler);
        cfg.steps = steps;
        let grid = SweepGrid::default_for(&cfg.scheduler);
        let result = sweep(&cfg, &grid, SelectionMetric::FinalLoss, 1000)?;
        println!(
            "{:<18} best η₀ = {:<10.4e} final loss {:.4} ± {:.4}",
            cfg.scheduler.name(),
            result.best.eta0,
            result.aggregate.final_loss_mean,
            result.aggregate.final_loss_std,
        );
        for g in &result.grid {
            println!("    η₀ = {:<10.4e} score {:.4}", g.point.eta0, g.score);
        }
    }
    Ok(())
}
