use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::log_gamma;

/// `log K_N(τ)`, `log D_{N,ℓ}(τ)` and the large-`N` approximation of the
/// latter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeConstants {
    pub log_k_n: f64,
    pub log_d: f64,
    pub log_d_asymptotic: f64,
}

fn lgamma_half(i: usize) -> f64 {
    log_gamma(i as f64 / 2.0).expect("positive argument")
}

/// `log K_N(τ) = -(N(N+1)/4) log N + (N/2) log(1+τ) + (N(N+1)/4) log 2 + Σ_{i≤N} log Γ(i/2)`.
pub fn log_normalization(n: usize, tau: f64) -> Result<f64> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    if !(tau > -1.0 && tau < 1.0) {
        return domain(format!("tau must lie in (-1, 1), got {tau}"));
    }
    let nf = n as f64;
    let q = nf * (nf + 1.0) / 4.0;
    Ok(-q * nf.ln() + nf / 2.0 * (1.0 + tau).ln() + q * 2f64.ln() + (1..=n).map(lgamma_half).sum::<f64>())
}

/// `D_{N,ℓ}(τ) = K_{N+ℓ}(τ)/K_N(τ) · ((N+ℓ)/N)^{N/2 + (N+ℓ)(N+ℓ-1)/4}`.
///
/// The two big powers of `N` and `N+ℓ` are merged before taking logs, which
/// leaves only `-(ℓ/2) log(1+ℓ/N)` from the ratio.
pub fn bridge_d(n: usize, ell: usize, tau: f64) -> Result<BridgeConstants> {
    let log_k_n = log_normalization(n, tau)?;
    let (nf, lf) = (n as f64, ell as f64);
    let m = n + ell;
    let mf = m as f64;
    let q = (mf * (mf + 1.0) - nf * (nf + 1.0)) / 4.0;
    let log_d = -q * nf.ln() - lf / 2.0 * (1.0 + lf / nf).ln()
        + lf / 2.0 * (1.0 + tau).ln()
        + q * 2f64.ln()
        + (n + 1..=m).map(lgamma_half).sum::<f64>();
    let log_d_asymptotic = -lf / 2.0 * nf.ln() - nf * lf / 2.0 + lf / 2.0 * (4.0 * PI * (1.0 + tau)).ln();
    Ok(BridgeConstants { log_k_n, log_d, log_d_asymptotic })
}
