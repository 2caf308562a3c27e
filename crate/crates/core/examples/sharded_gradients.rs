//! Simulated data parallelism: one batch of 64 samples split across 8 units.
//! The shard gradients feed the norm estimator; their weighted mean is the
//! batch gradient.

use glyder::estimators::{estimate, EstimatorMode};
use glyder::linalg::norm_sq;
use glyder::problems::{BatchSelector, ProblemHandle};
use glyder::sharding::shard_gradients;

fn main() -> Result<(), glyder::Error> {
    let mut p = ProblemHandle::logistic_regression(1000, 10, 8, 0)?;
    let x = p.initial_point().to_vec();
    let full = norm_sq(&p.full_grad(&x)?);
    let (mut mu, mut mean_sq) = (0.0, 0.0);
    let reps = 2000;
    for _ in 0..reps {
        let s = shard_gradients(&mut p, &x, &BatchSelector::Fresh(64), 8)?;
        let e = estimate(&s.batch, EstimatorMode::Normalized);
        mu += e.mu / reps as f64;
        mean_sq += norm_sq(&s.weighted_mean()) / reps as f64;
    }
    println!("‖∇f‖²         = {full:.5}");
    println!("E[μ]          = {mu:.5}");
    println!("E[‖mean‖²]    = {mean_sq:.5}   (biased upward by σ²/n)");
    Ok(())
}
