//! Dense `f64` vector helpers shared across the crate.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// `x - alpha * d`
pub fn step(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi - alpha * di).collect()
}

/// Coordinate-wise sum of equally sized vectors.
pub fn sum_vectors<'a, I>(dim: usize, vs: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a Vec<f64>>,
{
    let mut acc = vec![0.0; dim];
    for v in vs {
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b;
        }
    }
    acc
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `n` points evenly spaced on a log10 scale between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
pub fn power_iteration<F>(dim: usize, iters: usize, mut apply: F) -> f64
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.01 * i as f64).collect();
    let n = norm_sq(&v).sqrt();
    scale(1.0 / n, &mut v);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        lambda = dot(&v, &w);
        let wn = norm_sq(&w).sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        v = w;
        scale(1.0 / wn, &mut v);
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_endpoints_are_exact() {
        let g = logspace(1e-3, 1e2, 20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[19], 1e2);
        let r = (g[1] / g[0]).log10();
        for w in g.windows(2) {
            assert!(((w[1] / w[0]).log10() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let d = [0.5, 3.0, 1.0];
        let l = power_iteration(3, 200, |v| v.iter().zip(&d).map(|(a, b)| a * b).collect());
        assert!((l - 3.0).abs() < 1e-9);
    }
}
