use std::f64::consts::PI;

use crate::error::{domain, Result};

// ln of the Glaisher–Kinkelin constant, and ζ'(-1) = 1/12 - ln A.
const LN_GLAISHER: f64 = 0.248_754_477_033_784_26;
#[allow(clippy::excessive_precision)]
const ZETA_PRIME_M1: f64 = -0.165_421_143_700_450_92;

const DIRECT_LIMIT: f64 = 200.0;
const ASYMPTOTIC_FROM: f64 = 20.0;

fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln G(1+z)` from its large-`z` expansion.
fn log_g1p_asymptotic(z: f64) -> f64 {
    let lz = z.ln();
    let z2 = z * z;
    z2 / 2.0 * lz - 0.75 * z2 + z / 2.0 * (2.0 * PI).ln() - lz / 12.0 + ZETA_PRIME_M1 - 1.0 / (240.0 * z2)
        + 1.0 / (1008.0 * z2 * z2)
        - 1.0 / (1440.0 * z2 * z2 * z2)
        + 1.0 / (1056.0 * z2 * z2 * z2 * z2)
}

/// `ln G(x)` for `x > 0`, where `G(x+1) = Γ(x) G(x)` and `G(1) = 1`.
///
/// Integers and half-integers up to 200 are summed exactly from `G(1)` and
/// `G(1/2)`; everything else is shifted above 20 and uses the asymptotic
/// series.
pub fn log_barnes_g(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("Barnes G needs a positive finite argument, got {x}"));
    }
    let twice = 2.0 * x;
    if x <= DIRECT_LIMIT && twice == twice.round() {
        let k = twice.round() as usize;
        if k % 2 == 0 {
            return Ok((1..k / 2).map(|j| lgamma(j as f64)).sum());
        }
        let g_half = 2f64.ln() / 24.0 + 0.125 - 0.25 * PI.ln() - 1.5 * LN_GLAISHER;
        return Ok(g_half + (0..k / 2).map(|j| lgamma(j as f64 + 0.5)).sum::<f64>());
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < ASYMPTOTIC_FROM + 1.0 {
        shift += lgamma(y);
        y += 1.0;
    }
    Ok(log_g1p_asymptotic(y - 1.0) - shift)
}

/// Leading behaviour of `ln[G(N+a+1)/G(N+b+1)]` as `N → ∞`:
/// `(a-b)(N ln N - N + ½ ln 2π) + (a²-b²)/2 · ln N`.
pub fn log_barnes_g_ratio_asymptotic(n: f64, a: f64, b: f64) -> f64 {
    let ln_n = n.ln();
    (a - b) * (n * ln_n - n + 0.5 * (2.0 * PI).ln()) + 0.5 * (a * a - b * b) * ln_n
}
