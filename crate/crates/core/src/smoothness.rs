//! Per-step smoothness estimates `L_t`.
//!
//! Two adaptive estimators are provided alongside a fixed constant:
//! the curvature of the one-dimensional slice `η ↦ f(x − η·d)` (a single
//! Hessian-vector product on the current batch), and the maximum squared
//! coordinate of the batch gradient. Every estimate is clamped below by a
//! positive floor so the resulting stepsize stays finite and nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, max_abs, norm_sq};
use crate::problems::{BatchSelector, ProblemHandle};

pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    /// `dᵀ∇²f·d`, scaling with `‖d‖²`.
    #[default]
    Unnormalized,
    /// `dᵀ∇²f·d / ‖d‖²`, the Rayleigh quotient along `d`.
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothnessKind {
    Constant { value: f64 },
    /// Curvature along the descent direction.
    Proj1d,
    /// `max_i (∇f)_i²` of the batch mean gradient.
    Gnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimator {
    pub kind: SmoothnessKind,
    pub curvature_mode: CurvatureMode,
    pub floor: f64,
}

impl SmoothnessEstimator {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::invalid("constant_L", format!("must be positive and finite, got {value}")));
        }
        Ok(Self {
            kind: SmoothnessKind::Constant { value },
            curvature_mode: CurvatureMode::default(),
            floor: DEFAULT_FLOOR,
        })
    }

    pub fn proj_1d(curvature_mode: CurvatureMode) -> Self {
        Self { kind: SmoothnessKind::Proj1d, curvature_mode, floor: DEFAULT_FLOOR }
    }

    pub fn gnb() -> Self {
        Self { kind: SmoothnessKind::Gnb, curvature_mode: CurvatureMode::default(), floor: DEFAULT_FLOOR }
    }

    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::invalid("floor", format!("must be positive and finite, got {floor}")));
        }
        self.floor = floor;
        Ok(self)
    }

    /// `L_t` at `x`.
    ///
    /// `direction` is only read by the 1-d projection and `batch_grad` only by
    /// GNB. `batch` must be the batch the gradient was computed on.
    pub fn estimate(
        &self,
        problem: &mut ProblemHandle,
        x: &[f64],
        direction: &[f64],
        batch_grad: &[f64],
        batch: &BatchSelector,
    ) -> Result<f64> {
        match self.kind {
            SmoothnessKind::Constant { value } => Ok(value.max(self.floor)),
            SmoothnessKind::Proj1d => {
                curvature_1d(problem, x, direction, batch, self.curvature_mode, self.floor)
            }
            SmoothnessKind::Gnb => Ok(gnb_estimate(batch_grad, self.floor)),
        }
    }
}

/// Second derivative of `η ↦ f_b(x − η·d)` at 0, floored.
pub fn curvature_1d(
    problem: &mut ProblemHandle,
    x: &[f64],
    direction: &[f64],
    batch: &BatchSelector,
    mode: CurvatureMode,
    floor: f64,
) -> Result<f64> {
    let nd = norm_sq(direction);
    if nd == 0.0 {
        return Err(Error::invalid("direction", "must be nonzero"));
    }
    let hv = problem.hvp(x, direction, batch)?;
    let c = dot(direction, &hv);
    let c = match mode {
        CurvatureMode::Unnormalized => c,
        CurvatureMode::Directional => c / nd,
    };
    // negative curvature and NaN both land on the floor
    Ok(if c > floor { c } else { floor })
}

/// `max_i gᵢ²`, floored.
pub fn gnb_estimate(gradient: &[f64], floor: f64) -> f64 {
    let m = max_abs(gradient);
    let v = m * m;
    if v > floor {
        v
    } else {
        floor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;

    fn quad() -> ProblemHandle {
        ProblemHandle::noisy_quadratic(2, &[2.0, 1.0], 0.5, NoiseModel::Gaussian, 0).unwrap()
    }

    #[test]
    fn curvature_on_axis_and_diagonal() {
        let mut p = quad();
        let x = [0.3, 0.1];
        let b = BatchSelector::Fresh(2);
        let u = CurvatureMode::Unnormalized;
        assert_eq!(curvature_1d(&mut p, &x, &[1.0, 0.0], &b, u, DEFAULT_FLOOR).unwrap(), 2.0);
        assert_eq!(curvature_1d(&mut p, &x, &[1.0, 1.0], &b, u, DEFAULT_FLOOR).unwrap(), 3.0);
        let n = CurvatureMode::Directional;
        assert_eq!(curvature_1d(&mut p, &x, &[1.0, 1.0], &b, n, DEFAULT_FLOOR).unwrap(), 1.5);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let mut p = quad();
        let r = curvature_1d(&mut p, &[0.0, 0.0], &[0.0, 0.0], &BatchSelector::Full, CurvatureMode::Unnormalized, 1e-8);
        assert!(r.is_err());
    }

    #[test]
    fn gnb_values() {
        assert_eq!(gnb_estimate(&[3.0, -4.0], DEFAULT_FLOOR), 16.0);
        assert_eq!(gnb_estimate(&[-5.0, 2.0, 1.0], DEFAULT_FLOOR), 25.0);
        assert_eq!(gnb_estimate(&[0.0, 0.0], DEFAULT_FLOOR), DEFAULT_FLOOR);
    }

    #[test]
    fn dispatch() {
        let mut p = quad();
        let x = [5.0, -1.0];
        let c = SmoothnessEstimator::constant(2.0).unwrap();
        assert_eq!(c.estimate(&mut p, &x, &[1.0, 0.0], &[9.0, 9.0], &BatchSelector::Full).unwrap(), 2.0);
        let g = SmoothnessEstimator::gnb();
        assert_eq!(g.estimate(&mut p, &x, &[0.0, 0.0], &[3.0, -4.0], &BatchSelector::Full).unwrap(), 16.0);
        let pr = SmoothnessEstimator::proj_1d(CurvatureMode::Directional);
        assert_eq!(pr.estimate(&mut p, &x, &[1.0, 0.0], &[0.0, 0.0], &BatchSelector::Full).unwrap(), 2.0);
    }

    #[test]
    fn invalid_constructors() {
        assert!(SmoothnessEstimator::constant(0.0).is_err());
        assert!(SmoothnessEstimator::gnb().with_floor(0.0).is_err());
    }
}
