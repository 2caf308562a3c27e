use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hand-designed schedules used as baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineSchedule {
    Constant { eta0: f64 },
    /// `η₀·½(1 + cos(πt/T))`, reaching 0 at `t = T`.
    Cosine { eta0: f64, horizon: u64 },
    /// Squashed inverse square root, `η₀·√s/√(t + s)`.
    Rsqrt { eta0: f64, squash: f64 },
}

impl BaselineSchedule {
    pub fn validate(&self) -> Result<()> {
        let eta0 = self.eta0();
        if !(eta0 > 0.0 && eta0.is_finite()) {
            return Err(Error::invalid("eta0", format!("must be positive, got {eta0}")));
        }
        match *self {
            BaselineSchedule::Cosine { horizon: 0, .. } => {
                Err(Error::invalid("horizon", "must be at least 1"))
            }
            BaselineSchedule::Rsqrt { squash, .. } if !(squash > 0.0 && squash.is_finite()) => {
                Err(Error::invalid("squash", format!("must be positive, got {squash}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eta0(&self) -> f64 {
        match *self {
            BaselineSchedule::Constant { eta0 }
            | BaselineSchedule::Cosine { eta0, .. }
            | BaselineSchedule::Rsqrt { eta0, .. } => eta0,
        }
    }

    /// Stepsize at step `t` (0-based).
    pub fn stepsize(&self, t: u64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            BaselineSchedule::Constant { eta0 } => eta0,
            BaselineSchedule::Cosine { eta0, horizon } => {
                if t > horizon {
                    return Err(Error::invalid("t", format!("{t} is past the cosine horizon {horizon}")));
                }
                eta0 * 0.5 * (1.0 + (PI * t as f64 / horizon as f64).cos())
            }
            BaselineSchedule::Rsqrt { eta0, squash } => {
                eta0 * (squash.sqrt() / (t as f64 + squash).sqrt())
            }
        })
    }
}
