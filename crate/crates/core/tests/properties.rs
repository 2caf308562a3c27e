use glyder::estimators::{estimate, pairwise_estimate_bruteforce, EstimatorMode, GradientBatch};
use glyder::linalg::{dot, max_abs, norm_sq};
use glyder::noise::NoiseModel;
use glyder::problems::{BatchSelector, ProblemHandle};
use glyder::schedulers::{ema_update, BaselineSchedule, EmaConvention};
use glyder::sharding::shard_gradients;
use glyder::smoothness::{curvature_1d, gnb_estimate, CurvatureMode};
use proptest::prelude::*;

fn batch_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=16, 1usize..=64).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn linear_and_pairwise_forms_agree(grads in batch_strategy()) {
        let b = GradientBatch::new(grads).unwrap();
        let fast = estimate(&b, EstimatorMode::Normalized);
        let slow = pairwise_estimate_bruteforce(&b);
        // μ can cancel to near zero, so measure against the per-gradient energy
        let energy = b.grads().iter().map(|g| norm_sq(g)).sum::<f64>() / b.len() as f64;
        prop_assert!((fast.mu - slow.mu).abs() <= 1e-10 * slow.mu.abs().max(energy));
        prop_assert!((fast.gamma - slow.gamma).abs() <= 1e-10 * slow.gamma.max(energy));
    }

    #[test]
    fn raw_mu_never_exceeds_its_share_of_gamma(grads in batch_strategy()) {
        let b = GradientBatch::new(grads).unwrap();
        let n = b.len() as f64;
        let e = estimate(&b, EstimatorMode::Raw);
        prop_assert!(e.mu <= (n - 1.0) / n * e.gamma, "{} > {}", e.mu, (n - 1.0) / n * e.gamma);
    }

    #[test]
    fn ratios_are_nonnegative(grads in batch_strategy()) {
        let b = GradientBatch::new(grads).unwrap();
        for mode in [EstimatorMode::Raw, EstimatorMode::Normalized] {
            let e = estimate(&b, mode);
            prop_assert!(e.ratio >= 0.0);
            prop_assert!(e.gamma >= 0.0);
        }
    }

    #[test]
    fn directional_curvature_lies_in_the_spectrum(
        eig in prop::collection::vec(0.01f64..5.0, 1..12),
        seed in 0u64..1000,
    ) {
        let d = eig.len();
        let mut p = ProblemHandle::noisy_quadratic(d, &eig, 0.0, NoiseModel::Gaussian, seed).unwrap();
        let dir = NoiseModel::Gaussian.sample(&mut glyder::noise::stream(seed, 1), 1.0, d);
        prop_assume!(norm_sq(&dir) > 1e-12);
        let x = vec![0.5; d];
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let rq = curvature_1d(&mut p, &x, &dir, &BatchSelector::Full, CurvatureMode::Directional, 1e-8).unwrap();
        prop_assert!(rq <= hi * (1.0 + 1e-12) && rq >= lo * (1.0 - 1e-12));
        let raw = curvature_1d(&mut p, &x, &dir, &BatchSelector::Full, CurvatureMode::Unnormalized, 1e-8).unwrap();
        let quad: f64 = dir.iter().zip(&eig).map(|(v, l)| l * v * v).sum();
        prop_assert!((raw - quad).abs() <= 1e-12 * quad.max(1e-8));
    }

    #[test]
    fn gnb_is_squared_max_norm_and_floored(g in prop::collection::vec(-100.0f64..100.0, 1..32), floor in 1e-10f64..1.0) {
        let v = gnb_estimate(&g, floor);
        prop_assert!(v >= floor);
        let m = max_abs(&g);
        if m * m > floor {
            prop_assert_eq!(v, m * m);
        } else {
            prop_assert_eq!(v, floor);
        }
    }

    #[test]
    fn ema_stays_between_its_inputs(prev in 0.0f64..10.0, inst in 0.0f64..10.0, beta in 0.0f64..0.9999) {
        for conv in [EmaConvention::History, EmaConvention::Instantaneous] {
            let v = ema_update(prev, inst, beta, conv);
            prop_assert!(v >= prev.min(inst) - 1e-12 && v <= prev.max(inst) + 1e-12);
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn baseline_schedules_are_monotone(eta0 in 1e-4f64..1e2, squash in 0.1f64..1e3, horizon in 1u64..400) {
        let cos = BaselineSchedule::Cosine { eta0, horizon };
        let rs = BaselineSchedule::Rsqrt { eta0, squash };
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for t in 0..=horizon {
            let cur = (cos.stepsize(t).unwrap(), rs.stepsize(t).unwrap());
            prop_assert!(cur.0 <= prev.0 && cur.1 <= prev.1);
            prop_assert!(cur.0 >= 0.0 && cur.1 > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn shard_mean_is_the_batch_gradient(m in 2usize..40, k_frac in 0.0f64..1.0, seed in 0u64..100) {
        let k = 2 + ((m - 2) as f64 * k_frac) as usize;
        let mut p = ProblemHandle::logistic_regression(60, 4, 1, seed).unwrap();
        let x = vec![0.3, -0.2, 0.1, 0.7];
        let s = shard_gradients(&mut p, &x, &BatchSelector::Fresh(m), k).unwrap();
        let whole = p.stochastic_grad(&x, &BatchSelector::Indices(s.indices.clone())).unwrap();
        let mean = s.weighted_mean();
        let scale = norm_sq(&whole).sqrt().max(1e-300);
        prop_assert!(norm_sq(&mean.iter().zip(&whole).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt() <= 1e-12 * scale);
        prop_assert_eq!(s.counts.iter().sum::<usize>(), m);
    }

    #[test]
    fn projected_curvature_is_the_second_derivative_of_the_slice(
        eig in prop::collection::vec(0.1f64..3.0, 2..6),
        t in -1.0f64..1.0,
    ) {
        let d = eig.len();
        let mut p = ProblemHandle::noisy_quadratic(d, &eig, 0.0, NoiseModel::Gaussian, 0).unwrap();
        let x: Vec<f64> = (0..d).map(|i| t + i as f64 * 0.1).collect();
        let dir: Vec<f64> = (0..d).map(|i| 1.0 - 0.3 * i as f64).collect();
        let c = curvature_1d(&mut p, &x, &dir, &BatchSelector::Full, CurvatureMode::Unnormalized, 1e-8).unwrap();
        // f(x − ηd) is quadratic in η, so a three-point stencil is exact up to rounding
        let h = 1e-3;
        let f = |eta: f64| p.full_loss(&x.iter().zip(&dir).map(|(a, b)| a - eta * b).collect::<Vec<_>>()).unwrap();
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        prop_assert!((c - second).abs() <= 1e-5 * c.max(1.0));
        prop_assert!((c - dot(&dir, &p.hvp(&x, &dir, &BatchSelector::Full).unwrap())).abs() <= 1e-12 * c);
    }
}
