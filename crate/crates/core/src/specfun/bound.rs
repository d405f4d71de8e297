use std::f64::consts::PI;

use super::quadrature::{integrate, QuadratureSpec};
use crate::error::{domain, Result};

/// Growth rate `s(x)` of `|H_k(√(2k) x)|`, closed form.
///
/// Equal to `x²` on `[-1, 1]`; outside, the Plancherel–Rotach correction
/// `|x|√(x²-1) - ln(√(x²-1) + |x|)` is subtracted.
pub fn cramer_rate(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1.0 {
        x * x
    } else {
        let r = (x * x - 1.0).sqrt();
        x * x - (ax * r - (r + ax).ln())
    }
}

/// The same rate written as a logarithmic potential of the semicircle,
/// `1/2 + ln 2 + (2/π) ∫_{-1}^{1} √(1-y²) ln|x-y| dy`.
pub fn cramer_rate_potential(x: f64, quad: &QuadratureSpec) -> Result<f64> {
    let f = |y: f64| (1.0 - y * y).max(0.0).sqrt() * (x - y).abs().ln();
    let integral = if x.abs() < 1.0 {
        integrate(f, -1.0, x, quad)? + integrate(f, x, 1.0, quad)?
    } else {
        integrate(f, -1.0, 1.0, quad)?
    };
    Ok(0.5 + 2f64.ln() + 2.0 / PI * integral)
}

/// Exponential rate `h_τ(x)` bounding `e^{-k x²/(2(1+τ))} C_k(√k x)`.
///
/// For `τ > 0`: `-x²/(2(1+τ)) + ln(τ)/2 + s(x/(2√τ))`, maximal (zero) at
/// `x = ±(1+τ)`. For `τ = 0`: `-x²/2 + ln|x|`, which returns `-∞` at `x = 0`;
/// it only ever appears inside an exponential.
pub fn bound_rate(tau: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return domain(format!("bound_rate needs tau in [0, 1), got {tau}"));
    }
    if tau == 0.0 {
        if x == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        return Ok(-x * x / 2.0 + x.abs().ln());
    }
    Ok(-x * x / (2.0 * (1.0 + tau)) + 0.5 * tau.ln() + cramer_rate(x / (2.0 * tau.sqrt())))
}
