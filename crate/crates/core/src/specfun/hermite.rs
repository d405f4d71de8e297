use std::f64::consts::PI;

use super::bound::bound_rate;
use super::gamma::erf;
use super::gamma::log_factorial;
use super::quadrature::{integrate, integrate_to_infinity, QuadratureSpec};
use crate::error::{domain, Result};

const RESCALE: f64 = 1e150;

/// Monic Hermite-type polynomial `C_k(x)` for asymmetry `tau`.
///
/// `C_0 = 1`, `C_1 = x`, `C_{k+1} = x C_k - τ k C_{k-1}`; this is
/// `(τ/2)^{k/2} H_k(x/√(2τ))` for `τ > 0` and `x^k` for `τ = 0`. Overflows
/// for large `k·|x|`; see [`hermite_c_scaled`].
pub fn hermite_c(k: usize, tau: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for j in 1..k {
        let next = x * cur - tau * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_k(x)` in split form `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteEval {
    pub k: usize,
    pub tau: f64,
    pub mantissa: f64,
    pub log_scale: f64,
}

impl HermiteEval {
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |C_k(x)|`, `-∞` at a zero.
    pub fn log_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.log_scale
    }
}

/// Overflow-free evaluation of `C_k(x)`.
pub fn hermite_c_scaled(k: usize, tau: f64, x: f64) -> HermiteEval {
    let mut log_scale = 0.0;
    let (mut prev, mut cur) = (1.0, if k == 0 { 1.0 } else { x });
    for j in 1..k {
        let next = x * cur - tau * j as f64 * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    HermiteEval { k, tau, mantissa: cur, log_scale }
}

/// `ψ_k(x) = e^{-x²/(2(1+τ))} C_k(x) / √(k!)` for `k = 0..=n_max`.
///
/// Runs the factorial-normalised recurrence
/// `ψ_{k+1} = (x ψ_k - τ √k ψ_{k-1}) / √(k+1)` with a floating scale, so the
/// Gaussian weight is applied last and large `|x|` does not underflow.
pub fn weighted_hermite(n_max: usize, tau: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -x * x / (2.0 * (1.0 + tau));
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(log_scale.exp());
    for k in 0..n_max {
        let next = (x * cur - tau * (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// Single `ψ_n(x)` without allocating.
pub(crate) fn weighted_hermite_at(n: usize, tau: f64, x: f64) -> f64 {
    let mut log_scale = -x * x / (2.0 * (1.0 + tau));
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = (x * cur - tau * (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    cur * log_scale.exp()
}

/// Taylor coefficients of `exp(-(x0+δ)²/(2(1+τ))) / exp(-x0²/(2(1+τ)))` in `δ`.
pub(crate) fn gaussian_shift_taylor(x0: f64, tau: f64, order: usize) -> Vec<f64> {
    // exp(p(δ)) with p = -(2 x0 δ + δ²)/(2(1+τ)); n g_n = Σ_k k p_k g_{n-k}.
    let c = 1.0 / (2.0 * (1.0 + tau));
    let p1 = -2.0 * x0 * c;
    let p2 = -c;
    let mut g = vec![0.0; order + 1];
    g[0] = 1.0;
    for n in 1..=order {
        let mut s = p1 * g[n - 1];
        if n >= 2 {
            s += 2.0 * p2 * g[n - 2];
        }
        g[n] = s / n as f64;
    }
    g
}

/// Taylor coefficients `[k][a]` of `ψ_k(x0 + δ)` for `k = 0..=n_max`,
/// `a = 0..=order`.
///
/// Uses `C_k' = k C_{k-1}`, so the `b`-th derivative of `C_k/√k!` is
/// `√(k!/(k-b)!) · C_{k-b}/√((k-b)!)`.
pub fn weighted_hermite_taylor(n_max: usize, tau: f64, x0: f64, order: usize) -> Vec<Vec<f64>> {
    let psi = weighted_hermite(n_max, tau, x0);
    let shift = gaussian_shift_taylor(x0, tau, order);
    let mut out = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let mut row = vec![0.0; order + 1];
        // poly[b] = Taylor coefficient b of C_k/√k!, times the weight at x0
        let mut poly = vec![0.0; order + 1];
        let mut falling = 1.0;
        let mut bfact = 1.0;
        for b in 0..=order.min(k) {
            if b > 0 {
                falling *= ((k - b + 1) as f64).sqrt();
                bfact *= b as f64;
            }
            poly[b] = falling / bfact * psi[k - b];
        }
        for a in 0..=order {
            row[a] = (0..=a).map(|b| shift[a - b] * poly[b]).sum();
        }
        out.push(row);
    }
    out
}

/// `ln` of the constant term `√(2π(1+τ)) n! / (2^{n/2} Γ(n/2+1))` in `φ_n`.
pub fn log_phi_constant(n: usize, tau: f64) -> f64 {
    0.5 * (2.0 * PI * (1.0 + tau)).ln() + log_factorial(n)
        - 0.5 * n as f64 * 2f64.ln()
        - libm::lgamma_r(n as f64 / 2.0 + 1.0).0
}

/// `φ_n(0) / √(n!)`.
///
/// Zero for even `n`. For odd `n = 2m+1` it is `2(1+τ) (2m)!! Σ_{j>m} (-τ)^j
/// C(2j,j)/4^j / √(n!)`, the tail of the binomial series of `(1+τ)^{-1/2}`;
/// summing the tail avoids the cancellation in `const - 2∫_0^∞`.
pub(crate) fn phi_scaled_at_zero(n: usize, tau: f64) -> f64 {
    if n % 2 == 0 || tau == 0.0 {
        return 0.0;
    }
    let m = n / 2;
    let j0 = (m + 1) as f64;
    // ln |(-τ)^j C(2j,j) / 4^j| at j = m+1
    let log_first =
        j0 * tau.ln() + libm::lgamma_r(2.0 * j0 + 1.0).0 - 2.0 * libm::lgamma_r(j0 + 1.0).0 - j0 * 4f64.ln();
    let log_prefactor = (2.0 * (1.0 + tau)).ln() + m as f64 * 2f64.ln() + log_factorial(m) - 0.5 * log_factorial(n);
    let mut term = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut sum = 0.0;
    let mut j = m + 1;
    loop {
        sum += term;
        j += 1;
        term *= -tau * (2 * j - 1) as f64 / (2 * j) as f64;
        if term.abs() < 1e-17 * sum.abs() || j > m + 100_000 {
            break;
        }
    }
    sum * (log_first + log_prefactor).exp()
}

/// `φ_n(x) / √(n!)`, the factorial-normalised antiderivative
/// `φ_n(x) = const - 2 ∫_x^∞ e^{-t²/(2(1+τ))} C_n(t) dt`.
///
/// `φ_n` is odd for even `n` and even for odd `n`. Inside the bulk
/// `|x| ≤ √n (1+τ)` it is evaluated as `φ_n(0) + 2∫_0^{|x|}`, which keeps full
/// relative accuracy where `φ_n` is exponentially small; outside, the tail
/// form is used.
pub fn phi_scaled(n: usize, tau: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return domain(format!("phi needs tau in [0, 1), got {tau}"));
    }
    let s = 1.0 + tau;
    if n == 0 {
        return Ok((2.0 * PI * s).sqrt() * erf(x / (2.0 * s).sqrt()));
    }
    let parity = if n % 2 == 0 && x < 0.0 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let nf = n as f64;
    let edge = nf.sqrt() * s;
    let inner = QuadratureSpec { abs_tol: f64::MIN_POSITIVE, ..*quad };
    let psi = |t: f64| weighted_hermite_at(n, tau, t);
    if ax <= edge {
        let body = integrate(psi, 0.0, ax, &inner)?;
        return Ok(parity * (phi_scaled_at_zero(n, tau) + 2.0 * body));
    }
    let constant = (log_phi_constant(n, tau) - 0.5 * log_factorial(n)).exp();
    let half_log_fact = 0.5 * log_factorial(n);
    let envelope = move |t: f64| -> f64 {
        if tau == 0.0 {
            // exact: t^n e^{-t²/2} / √n!, decreasing past √n
            return (nf * t.ln() - t * t / 2.0 - half_log_fact).exp();
        }
        let h = bound_rate(tau, t / nf.sqrt()).unwrap_or(0.0);
        1e3 * (nf * h).exp()
    };
    let tail = integrate_to_infinity(psi, ax, edge, envelope, &inner)?;
    Ok(parity * (constant - 2.0 * tail))
}

/// `φ_n(x)` itself; overflows once `n!` does.
pub fn phi(n: usize, tau: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(phi_scaled(n, tau, x, quad)? * (0.5 * log_factorial(n)).exp())
}
