//! The two oracle stepsizes that assume `∇f` and `L` are known, run on a
//! noisy quadratic.

use glyder::harness::{run_trial, ProblemSpec, RunConfig, SchedulerSpec};
use glyder::schedulers::{oracle_expected_stepsize, oracle_inner_product_stepsize};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // ⟨∇f, g⟩ / (L‖g‖²) for one draw g
    let eta = oracle_inner_product_stepsize(&[2.0, 1.0], &[2.5, 0.5], 2.0)?;
    println!("inner-product stepsize: {eta:.4}");
    // (1/L) · ‖∇f‖² / (‖∇f‖² + σ²)
    println!("expected stepsize:      {:.4}", oracle_expected_stepsize(3.0, 1.0, 2.0)?);

    for scheduler in [SchedulerSpec::OracleInnerProduct, SchedulerSpec::OracleExpected] {
        let mut cfg = RunConfig::new(ProblemSpec::quadratic(20, 1.0), scheduler);
        cfg.steps = 500;
        let rec = run_trial(&cfg, 0)?;
        println!(
            "{:<22} min ‖∇f‖² = {:.3e}, final loss = {:.4}",
            rec.scheduler,
            rec.summary.min_grad_norm_sq.unwrap_or(f64::NAN),
            rec.summary.final_loss
        );
    }
    Ok(())
}
