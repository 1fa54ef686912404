use std::f64::consts::PI;

use super::AccuracyTarget;
use crate::error::{Error, Result};
use crate::special::erf;

/// `exp(-(sigma-omega)^2 / (2 Lambda^2)) / (sqrt(2 pi) Lambda)`.
pub fn gaussian_eval(sigma: f64, omega: f64, lambda: f64) -> f64 {
    let d = (sigma - omega) / lambda;
    (-0.5 * d * d).exp() / ((2.0 * PI).sqrt() * lambda)
}

/// Width `Lambda = Delta / sqrt(2 ln(1/Sigma))`, checked against
/// `erf(Delta / (sqrt2 Lambda)) >= 1 - Sigma`.
pub fn git_resolution(target: &AccuracyTarget) -> Result<f64> {
    target.validate()?;
    let lambda = target.delta / (2.0 * (1.0 / target.sigma).ln()).sqrt();
    let captured = erf(target.delta / (2f64.sqrt() * lambda));
    if captured < 1.0 - target.sigma - 1e-15 {
        return Err(Error::Numeric(format!(
            "Gaussian width {lambda} captures only {captured} of the mass"
        )));
    }
    Ok(lambda)
}
