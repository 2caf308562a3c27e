use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm_sq};

fn check_smoothness(l: f64) -> Result<()> {
    if !(l > 0.0) {
        return Err(Error::invalid("L", format!("must be positive, got {l}")));
    }
    Ok(())
}

/// Best stepsize along `g` under the descent-lemma bound:
/// `⟨∇f, g⟩ / (L‖g‖²)`. Not clipped; negative when `g` points uphill.
pub fn oracle_inner_product_stepsize(true_grad: &[f64], g: &[f64], l: f64) -> Result<f64> {
    check_dim(true_grad.len(), g.len())?;
    check_smoothness(l)?;
    let gg = norm_sq(g);
    if gg == 0.0 {
        return Err(Error::invalid("g", "must be nonzero"));
    }
    Ok(dot(true_grad, g) / (l * gg))
}

/// Stepsize minimizing the expected descent-lemma bound:
/// `(1/L)·‖∇f‖² / (‖∇f‖² + σ²)`.
pub fn oracle_expected_stepsize(norm_sq: f64, sigma_sq: f64, l: f64) -> Result<f64> {
    check_smoothness(l)?;
    if !(norm_sq >= 0.0 && sigma_sq >= 0.0) {
        return Err(Error::invalid("norm_sq/sigma_sq", "must be nonnegative"));
    }
    if norm_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(norm_sq / (norm_sq + sigma_sq) / l)
}
