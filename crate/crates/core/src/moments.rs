//! Closed-form moment formulas: exact Ginibre moments, the bulk asymptotic
//! prediction with its constant `C_τ(ℓ)`, the multi-point prediction, the
//! core constant `𝒞_ℓ` and the Barnes-G form of the constant for real `ℓ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{assemble, limit_kernel, upper_blocks, HatExpansion, KernelSource};
use crate::skewalg::{delta_limit, pfaffian_jet, pfaffian_real, vandermonde, JetShape, MAX_JET_HALF_DIM};
use crate::specfun::{log_barnes_g, log_gamma};

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..1.0).contains(&tau) {
        return domain(format!("tau must lie in [0, 1), got {tau}"));
    }
    Ok(())
}

/// `log E|det A_N|^ℓ` for the real Ginibre ensemble (`τ = 0`):
/// `-(Nℓ/2) log N + (Nℓ/2) log 2 + Σ_{i≤N} [log Γ((ℓ+i)/2) - log Γ(i/2)]`.
///
/// Valid for real `ℓ > -1`; non-integer `ℓ` is only supported for even `N`.
pub fn log_exact_ginibre_moment(n: usize, ell: f64) -> Result<f64> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    if !(ell > -1.0) || !ell.is_finite() {
        return domain(format!("moment exponent must exceed -1, got {ell}"));
    }
    if ell.fract() != 0.0 && n % 2 == 1 {
        return domain(format!("non-integer exponents need even N, got N = {n}"));
    }
    let (nf, half) = (n as f64, n as f64 * ell / 2.0);
    let mut total = -half * nf.ln() + half * 2f64.ln();
    for i in 1..=n {
        let i = i as f64;
        total += log_gamma((ell + i) / 2.0)? - log_gamma(i / 2.0)?;
    }
    Ok(total)
}

/// `log 𝒞_ℓ = (ℓ/2) log 2π - (ℓ(ℓ-1)/4) log 2 - Σ_{j≤ℓ} log Γ(j/2)`.
pub fn log_c_script_closed(ell: usize) -> f64 {
    let lf = ell as f64;
    lf / 2.0 * (2.0 * PI).ln()
        - lf * (lf - 1.0) / 4.0 * 2f64.ln()
        - (1..=ell).map(|j| log_gamma(j as f64 / 2.0).expect("positive")).sum::<f64>()
}

pub fn c_script_closed(ell: usize) -> f64 {
    log_c_script_closed(ell).exp()
}

/// `log C_τ(ℓ) = (ℓ/2) log(1+τ) - (ℓ(ℓ+1)/4) log(1-τ²) + log 𝒞_ℓ`.
pub fn log_c_tau(tau: f64, ell: usize) -> Result<f64> {
    check_tau(tau)?;
    let lf = ell as f64;
    Ok(lf / 2.0 * (1.0 + tau).ln() - lf * (lf + 1.0) / 4.0 * (1.0 - tau * tau).ln() + log_c_script_closed(ell))
}

/// `𝒞_ℓ` from its definition: `(4π)^{ℓ/2}` times the Vandermonde limit of
/// `pf[𝓗]` at a coincident point, through the jet machinery.
pub fn c_script(ell: usize) -> Result<f64> {
    if ell == 0 {
        return Ok(1.0);
    }
    if ell > MAX_JET_HALF_DIM {
        return domain(format!("𝒞_ℓ by jets is limited to ℓ ≤ {MAX_JET_HALF_DIM}"));
    }
    let shape = JetShape::for_limit(ell)?;
    let expansion = HatExpansion::new(KernelSource::Limit { tau: 0.0 }, 0.0, ell - 1)?;
    let limit = delta_limit(&pfaffian_jet(&expansion.matrix(&shape)?)?)?;
    Ok((4.0 * PI).powf(ell as f64 / 2.0) * limit)
}

/// Barnes-G form of the constant, defined for real `ℓ > -1`:
/// `(1+τ)^{ℓ/2} (1-τ²)^{-ℓ(ℓ+1)/4} (2π)^{ℓ/2} G(1/2) / (2^{ℓ(ℓ-1)/4} G(ℓ/2+1) G(ℓ/2+1/2))`.
pub fn log_conjecture_constant(tau: f64, ell: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(ell > -1.0) || !ell.is_finite() {
        return domain(format!("exponent must exceed -1, got {ell}"));
    }
    Ok(ell / 2.0 * (1.0 + tau).ln() - ell * (ell + 1.0) / 4.0 * (1.0 - tau * tau).ln()
        + ell / 2.0 * (2.0 * PI).ln()
        + log_barnes_g(0.5)?
        - ell * (ell - 1.0) / 4.0 * 2f64.ln()
        - log_barnes_g(ell / 2.0 + 1.0)?
        - log_barnes_g(ell / 2.0 + 0.5)?)
}

/// Large-`N` prediction `exp(log_exp_part + power · log N + log_constant)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub n: usize,
    pub log_exp_part: f64,
    pub power: f64,
    pub log_constant: f64,
}

impl AsymptoticPrediction {
    pub fn log_value(&self) -> f64 {
        self.log_exp_part + self.power * (self.n as f64).ln() + self.log_constant
    }
}

/// Bulk prediction for `E|det(A_N - μ)|^ℓ`:
/// `e^{(Nℓ/2)(μ²/(1+τ) - 1)} N^{ℓ(ℓ-1)/4} C_τ(ℓ)`.
pub fn asymptotic_moment(tau: f64, mu: f64, ell: usize, n: usize) -> Result<AsymptoticPrediction> {
    check_tau(tau)?;
    if !(mu.abs() < 1.0 + tau) {
        return domain(format!("mu = {mu} lies outside the bulk (-{0}, {0})", 1.0 + tau));
    }
    if ell == 0 {
        return domain("exponent must be at least 1");
    }
    let (nf, lf) = (n as f64, ell as f64);
    Ok(AsymptoticPrediction {
        n,
        log_exp_part: nf * lf / 2.0 * (mu * mu / (1.0 + tau) - 1.0),
        power: lf * (lf - 1.0) / 4.0,
        log_constant: log_c_tau(tau, ell)?,
    })
}

/// The same prediction for real `ℓ > -1`, with the Barnes-G constant.
pub fn conjecture_moment(tau: f64, mu: f64, ell: f64, n: usize) -> Result<AsymptoticPrediction> {
    check_tau(tau)?;
    if !(mu.abs() < 1.0 + tau) {
        return domain(format!("mu = {mu} lies outside the bulk (-{0}, {0})", 1.0 + tau));
    }
    let nf = n as f64;
    Ok(AsymptoticPrediction {
        n,
        log_exp_part: nf * ell / 2.0 * (mu * mu / (1.0 + tau) - 1.0),
        power: ell * (ell - 1.0) / 4.0,
        log_constant: log_conjecture_constant(tau, ell)?,
    })
}

/// Multi-point prediction for `E ∏|det(A_N - μ_i)|` at distinct bulk points:
/// `e^{(N/2)Σ(μ_i²/(1+τ) - 1)} N^{ℓ(ℓ-1)/4} (4π(1+τ))^{ℓ/2} (1-τ²)^{-ℓ(ℓ+1)/4}
///  pf[𝓗(√N(μ_i-μ_j)/√(1-τ²))] / |Δ(√N μ/√(1-τ²))|`.
pub fn log_multipoint_asymptotic(tau: f64, mus: &[f64], n: usize) -> Result<f64> {
    check_tau(tau)?;
    let ell = mus.len();
    if ell == 0 {
        return domain("need at least one point");
    }
    for &mu in mus {
        if !(mu.abs() < 1.0 + tau) {
            return domain(format!("mu = {mu} lies outside the bulk"));
        }
    }
    for i in 0..ell {
        for j in i + 1..ell {
            if mus[i] == mus[j] {
                return Err(Error::CoincidentPoints(mus[i], mus[j]));
            }
        }
    }
    let (nf, lf) = (n as f64, ell as f64);
    let c = (1.0 - tau * tau).sqrt();
    let us: Vec<f64> = mus.iter().map(|mu| nf.sqrt() * mu / c).collect();
    let blocks = upper_blocks(ell, |i, j| limit_kernel(0.0, us[i] - us[j]))?;
    let pf = pfaffian_real(&assemble(&blocks)?);
    if pf.sign <= 0.0 {
        return Err(Error::Numerical(format!("limit Pfaffian is not positive at {mus:?}")));
    }
    let exp_part: f64 = mus.iter().map(|mu| nf / 2.0 * (mu * mu / (1.0 + tau) - 1.0)).sum();
    Ok(exp_part + lf * (lf - 1.0) / 4.0 * nf.ln() + lf / 2.0 * (4.0 * PI * (1.0 + tau)).ln()
        - lf * (lf + 1.0) / 4.0 * (1.0 - tau * tau).ln()
        + pf.log_abs
        - vandermonde(&us).abs().ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_small_moments() {
        assert_relative_eq!(log_exact_ginibre_moment(2, 2.0).unwrap().exp(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(log_exact_ginibre_moment(1, 2.0).unwrap().exp(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(log_exact_ginibre_moment(2, 1.0).unwrap().exp(), 0.5, max_relative = 1e-14);
        assert!(log_exact_ginibre_moment(3, 0.5).is_err());
        assert!(log_exact_ginibre_moment(4, -1.0).is_err());
        assert_eq!(log_exact_ginibre_moment(5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn c_tau_values() {
        assert_relative_eq!(log_c_tau(0.0, 1).unwrap().exp(), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(log_c_tau(0.0, 2).unwrap().exp(), (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(log_c_tau(0.5, 1).unwrap().exp(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn elliptic_to_ginibre_ratio() {
        for ell in 1..=5 {
            let tau: f64 = 0.35;
            let lf = ell as f64;
            let ratio = log_c_tau(tau, ell).unwrap() - log_c_tau(0.0, ell).unwrap();
            let want = lf / 2.0 * (1.0 + tau).ln() - lf * (lf + 1.0) / 4.0 * (1.0 - tau * tau).ln();
            assert!((ratio - want).abs() < 1e-14);
        }
    }

    #[test]
    fn c_script_by_jets() {
        assert_relative_eq!(c_script(1).unwrap(), 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(c_script(2).unwrap(), (2.0 * PI).sqrt(), max_relative = 1e-12);
        for ell in 1..=5 {
            let v = c_script(ell).unwrap();
            assert!(v > 0.0);
            assert_relative_eq!(v, c_script_closed(ell), max_relative = 1e-9);
        }
    }

    #[test]
    fn conjecture_constant_matches_integer_constant() {
        for tau in [0.0, 0.5] {
            for ell in 1..=6 {
                let a = log_conjecture_constant(tau, ell as f64).unwrap();
                let b = log_c_tau(tau, ell).unwrap();
                assert!((a - b).abs() < 1e-9, "tau={tau} ell={ell}: {a} vs {b}");
            }
        }
        assert!(log_conjecture_constant(0.3, 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn prediction_is_even_in_mu() {
        let a = asymptotic_moment(0.5, 0.4, 2, 100).unwrap();
        let b = asymptotic_moment(0.5, -0.4, 2, 100).unwrap();
        assert_eq!(a, b);
        assert!(asymptotic_moment(0.5, 1.6, 2, 100).is_err());
    }

    #[test]
    fn multipoint_single_point_reduces() {
        for tau in [0.0, 0.5] {
            let m = log_multipoint_asymptotic(tau, &[0.3], 50).unwrap();
            let a = asymptotic_moment(tau, 0.3, 1, 50).unwrap().log_value();
            assert!((m - a).abs() < 1e-12);
        }
    }

    #[test]
    fn multipoint_factorizes_when_separated() {
        let n = 200;
        let mus = [-0.5, 0.5];
        let m = log_multipoint_asymptotic(0.0, &mus, n).unwrap();
        let singles: f64 = mus.iter().map(|&mu| asymptotic_moment(0.0, mu, 1, n).unwrap().log_value()).sum();
        assert!((m - singles).abs() < 0.01);
    }
}
