//! Local smoothness proxies: curvature along a direction (exact or by finite
//! differences of the gradient) and the Gauss-Newton-Bartlett estimate.

use glyder::problems::{BatchSelector, ProblemHandle};
use glyder::smoothness::{curvature_1d, gnb_estimate, CurvatureMode, DEFAULT_FLOOR};

fn main() -> Result<(), glyder::Error> {
    let mut p = ProblemHandle::logistic_regression(500, 6, 8, 0)?;
    let x = vec![0.2; 6];
    let g = p.full_grad(&x)?;
    let full = BatchSelector::Full;
    for mode in [CurvatureMode::Unnormalized, CurvatureMode::Directional] {
        let c = curvature_1d(&mut p, &x, &g, &full, mode, DEFAULT_FLOOR)?;
        println!("{mode:?} curvature along ∇f: {c:.6e}");
    }
    let exact = p.hvp(&x, &g, &full)?;
    let fd = p.hvp_finite_difference(&x, &g, &full)?;
    let err = exact.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("analytic vs finite-difference Hv: max gap {err:.2e}");
    println!("GNB on (3, -4): {}", gnb_estimate(&[3.0, -4.0], DEFAULT_FLOOR));

    let mut mlp = ProblemHandle::mlp_classifier(&[2, 16, 3], 256, 8, 0)?;
    let w = mlp.initial_point().to_vec();
    let d = mlp.full_grad(&w)?;
    let c = curvature_1d(&mut mlp, &w, &d, &full, CurvatureMode::Directional, DEFAULT_FLOOR)?;
    println!("MLP curvature along ∇f (finite differences): {c:.4}");
    Ok(())
}
