//! The two-set scheduler: `n` gradients estimate `μ/γ`, another `n` give the
//! direction, and the step is `(1/L)·(μ/γ)` along their mean.

use glyder::noise::NoiseModel;
use glyder::problems::ProblemHandle;
use glyder::schedulers::{glyder_theoretical_step, DirectionAggregation};

fn main() -> Result<(), glyder::Error> {
    let eig: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let mut p = ProblemHandle::noisy_quadratic(20, &eig, 1.0, NoiseModel::Gaussian, 0)?;
    let l = p.constants().require_smoothness()?;
    let mut x = p.initial_point().to_vec();
    for t in 1..=300 {
        let (next, rec) = glyder_theoretical_step(&mut p, &x, 16, l, DirectionAggregation::Mean)?;
        x = next;
        if t % 50 == 0 {
            let g = glyder::linalg::norm_sq(&p.full_grad(&x)?);
            println!("t={t:>3}  μ/γ={:.3}  η={:.3}  ‖∇f‖²={g:.3e}", rec.ratio, rec.stepsize);
        }
    }
    Ok(())
}
