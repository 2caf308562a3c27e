//! Estimating `‖∇f‖²` from a handful of noisy gradients.
//!
//! The squared norm of the batch mean overshoots by `σ²/n`; the pairwise
//! estimator `μ` does not.

use glyder::estimators::{estimate, monte_carlo_moments, sample_batch, variance_gaussian_exact, EstimatorMode};
use glyder::linalg::norm_sq;
use glyder::noise::{stream, NoiseModel};

fn main() -> Result<(), glyder::Error> {
    let truth = [1.0, -2.0, 0.5];
    let mut rng = stream(7, 0);
    let batch = sample_batch(&mut rng, &truth, 1.5, 8, NoiseModel::Gaussian)?;

    let e = estimate(&batch, EstimatorMode::Normalized);
    println!("‖∇f‖²           = {}", norm_sq(&truth));
    println!("μ (pairwise)    = {:.4}", e.mu);
    println!("‖mean‖² (γ)     = {:.4}", e.gamma);
    println!("μ/γ             = {:.4}", e.ratio);
    let raw = estimate(&batch, EstimatorMode::Raw);
    println!("raw μ/γ         = {:.4}  (normalized × (n−1)/n)", raw.ratio);

    let m = monte_carlo_moments(1.0, 1.0, 8, 10, 200_000, 1)?;
    println!(
        "\nover {} batches: E[μ] = {:.4} ± {:.4}, Var μ = {:.5} (closed form {:.5})",
        m.count,
        m.mean,
        m.std_error(),
        m.variance,
        variance_gaussian_exact(1.0, 1.0, 8, 10)
    );
    Ok(())
}
