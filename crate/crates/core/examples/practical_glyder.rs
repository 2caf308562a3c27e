//! The practical scheduler on logistic regression: one batch split into `n`
//! shards, the curvature along the step direction as `L_t`, and an EMA over
//! the instantaneous stepsizes.
//!
//! The unnormalized curvature `dᵀHd` carries a factor `‖d‖²`, so with small
//! gradients `L_t` hits its floor and the stepsize grows without bound. The
//! directional curvature `dᵀHd/‖d‖²` keeps the step on the scale of `1/L`.

use glyder::linalg::norm_sq;
use glyder::problems::ProblemHandle;
use glyder::schedulers::{glyder_practical_step, DirectionSource, EmaConvention, GlyderState, PracticalConfig};
use glyder::smoothness::{CurvatureMode, SmoothnessEstimator};

fn run(mode: CurvatureMode) -> Result<(), glyder::Error> {
    let mut p = ProblemHandle::logistic_regression(1000, 10, 8, 0)?;
    let cfg = PracticalConfig::new(8, SmoothnessEstimator::proj_1d(mode));
    let mut state = GlyderState::new(0.1, 0.99, EmaConvention::History)?;
    let mut x = p.initial_point().to_vec();
    println!("{mode:?} curvature");
    for t in 1..=400 {
        let (next, s, rec) = glyder_practical_step(&state, &cfg, &mut p, &x, DirectionSource::BatchGradient)?;
        x = next;
        state = s;
        if t % 100 == 0 {
            println!(
                "  t={t:>3}  loss={:<12.4}  ‖∇f‖²={:.2e}  ratio={:.3}  L_t={:.3e}  η={:.4e}",
                p.full_loss(&x)?,
                norm_sq(&p.full_grad(&x)?),
                rec.ratio,
                rec.smoothness,
                rec.stepsize
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), glyder::Error> {
    run(CurvatureMode::Unnormalized)?;
    run(CurvatureMode::Directional)
}
