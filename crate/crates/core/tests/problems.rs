use glyder::linalg::dot;
use glyder::noise::{stream, NoiseModel};
use glyder::problems::{BatchSelector, ProblemHandle};
use rand::Rng;
use rand_distr::StandardNormal;

fn random_vec(seed: u64, dim: usize, scale: f64) -> Vec<f64> {
    let mut rng = stream(seed, 0);
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Central differences of the batch loss along each coordinate.
fn numeric_grad(p: &mut ProblemHandle, x: &[f64], b: &BatchSelector) -> Vec<f64> {
    let h = 1e-6;
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (p.loss(&xp, b).unwrap() - p.loss(&xm, b).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol * scale, "coordinate {i}: {x} vs {y}");
    }
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut p = ProblemHandle::logistic_regression(200, 6, 8, 3).unwrap();
    let x = random_vec(1, 6, 0.5);
    for b in [BatchSelector::Full, BatchSelector::Indices(vec![3, 3, 17, 150])] {
        let g = p.stochastic_grad(&x, &b).unwrap();
        assert_close(&g, &numeric_grad(&mut p, &x, &b), 1e-7);
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut p = ProblemHandle::mlp_classifier(&[3, 5, 4, 3], 64, 4, 11).unwrap();
    let x = {
        let x0 = p.initial_point().to_vec();
        let jitter = random_vec(2, x0.len(), 0.1);
        x0.iter().zip(&jitter).map(|(a, b)| a + b).collect::<Vec<_>>()
    };
    for b in [BatchSelector::Full, BatchSelector::Indices(vec![0, 5, 5, 63])] {
        let g = p.stochastic_grad(&x, &b).unwrap();
        assert_close(&g, &numeric_grad(&mut p, &x, &b), 1e-6);
    }
}

#[test]
fn logistic_analytic_hvp_matches_finite_differences() {
    let mut p = ProblemHandle::logistic_regression(100, 5, 8, 0).unwrap();
    let x = random_vec(4, 5, 1.0);
    let v = random_vec(5, 5, 1.0);
    let b = BatchSelector::Indices(vec![1, 2, 3, 50, 99]);
    let exact = p.hvp(&x, &v, &b).unwrap();
    let fd = p.hvp_finite_difference(&x, &v, &b).unwrap();
    assert_close(&fd, &exact, 1e-6);
}

#[test]
fn hessian_vector_products_are_symmetric() {
    let mut logistic = ProblemHandle::logistic_regression(80, 7, 8, 9).unwrap();
    let mut mlp = ProblemHandle::mlp_classifier(&[2, 6, 3], 40, 4, 9).unwrap();
    for (p, tol) in [(&mut logistic, 1e-12), (&mut mlp, 1e-5)] {
        let d = p.dim();
        let x = random_vec(10, d, 0.3);
        let (u, v) = (random_vec(11, d, 1.0), random_vec(12, d, 1.0));
        let uhv = dot(&u, &p.hvp(&x, &v, &BatchSelector::Full).unwrap());
        let vhu = dot(&v, &p.hvp(&x, &u, &BatchSelector::Full).unwrap());
        assert!((uhv - vhu).abs() <= tol * uhv.abs().max(1.0), "{uhv} vs {vhu}");
    }
}

#[test]
fn quadratic_stochastic_gradient_is_unbiased() {
    for noise in [NoiseModel::Gaussian, NoiseModel::Sphere] {
        let mut p = ProblemHandle::noisy_quadratic(4, &[0.5, 1.0, 2.0, 3.0], 2.0, noise, 21).unwrap();
        let x = vec![0.3, -1.0, 2.0, 0.5];
        let full = p.full_grad(&x).unwrap();
        let trials = 20_000;
        let mut sum = [0.0; 4];
        let mut sum_sq = [0.0; 4];
        for _ in 0..trials {
            let g = p.stochastic_grad(&x, &BatchSelector::Fresh(1)).unwrap();
            for i in 0..4 {
                sum[i] += g[i];
                sum_sq[i] += g[i] * g[i];
            }
        }
        for i in 0..4 {
            let mean = sum[i] / trials as f64;
            let var = sum_sq[i] / trials as f64 - mean * mean;
            let se = (var / trials as f64).sqrt();
            assert!((mean - full[i]).abs() <= 4.0 * se, "{noise:?} coordinate {i}: {mean} vs {}", full[i]);
        }
    }
}

#[test]
fn dataset_minibatch_gradient_is_unbiased() {
    let mut p = ProblemHandle::logistic_regression(50, 3, 4, 2).unwrap();
    let x = vec![0.2, -0.4, 0.1];
    let full = p.full_grad(&x).unwrap();
    let trials = 20_000;
    let grads: Vec<Vec<f64>> =
        (0..trials).map(|_| p.stochastic_grad(&x, &BatchSelector::Fresh(4)).unwrap()).collect();
    for i in 0..3 {
        let col: Vec<f64> = grads.iter().map(|g| g[i]).collect();
        let m = glyder::estimators::Moments::from_samples(&col);
        assert!((m.mean - full[i]).abs() <= 4.0 * m.std_error());
    }
}

#[test]
fn branches_are_deterministic_and_distinct() {
    let base = ProblemHandle::mlp_classifier(&[2, 4, 2], 30, 5, 1).unwrap();
    let x = base.initial_point().to_vec();
    let draw = |s: u64| {
        let mut p = base.branch(s);
        (0..5).map(|_| p.stochastic_grad(&x, &BatchSelector::Fresh(5)).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn quadratic_constants_are_known() {
    let p = ProblemHandle::noisy_quadratic(3, &[1.0, 2.0, 4.0], 0.5, NoiseModel::Gaussian, 0).unwrap();
    let c = p.constants();
    assert_eq!(c.smoothness, Some(4.0));
    assert_eq!(c.sigma, Some(0.5));
    // x₀ = 1: f = ½(1 + 2 + 4)
    assert_eq!(c.initial_gap, Some(3.5));
}
