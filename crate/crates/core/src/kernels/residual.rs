use std::f64::consts::PI;

use super::block::{EllipticParams, KernelBlock};
use super::finite::FiniteKernel;
use crate::error::{Error, Result};
use crate::specfun::{integrate, weighted_hermite, QuadratureSpec};

const MAX_TAIL_TERMS: usize = 1_000_000;
const RESCALE: f64 = 1e150;

/// Running `ψ_k(x)` with a floating scale.
struct PsiWalker {
    tau: f64,
    x: f64,
    k: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
}

impl PsiWalker {
    fn new(tau: f64, x: f64) -> Self {
        Self { tau, x, k: 0, prev: 0.0, cur: 1.0, log_scale: -x * x / (2.0 * (1.0 + tau)) }
    }

    fn value(&self) -> f64 {
        self.cur * self.log_scale.exp()
    }

    fn prev_value(&self) -> f64 {
        self.prev * self.log_scale.exp()
    }

    fn step(&mut self) {
        let k = self.k as f64;
        let next = (self.x * self.cur - self.tau * k.sqrt() * self.prev) / (k + 1.0).sqrt();
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        if self.cur.abs() > RESCALE {
            self.cur /= RESCALE;
            self.prev /= RESCALE;
            self.log_scale += RESCALE.ln();
        }
    }
}

/// Tails `(Σ_{k≥from} ψ_k(u)ψ_k(v), Σ_{k≥from} ψ_k'(u)ψ_k(v))` of the
/// Mehler series, both divided by `√(2π)`.
pub(crate) fn mehler_tail(tau: f64, u: f64, v: f64, from: usize) -> Result<(f64, f64)> {
    let mut wu = PsiWalker::new(tau, u);
    let mut wv = PsiWalker::new(tau, v);
    for _ in 0..from {
        wu.step();
        wv.step();
    }
    // terms grow until k passes the turning point, then decay
    let turning = (u * u).max(v * v) / ((1.0 + tau) * (1.0 + tau));
    let (mut s, mut d) = (0.0, 0.0);
    let mut biggest: f64 = 0.0;
    let mut quiet = 0;
    for _ in 0..MAX_TAIL_TERMS {
        let k = wu.k as f64;
        let pu = wu.value();
        let pv = wv.value();
        let dpu = -u / (1.0 + tau) * pu + if wu.k > 0 { k.sqrt() * wu.prev_value() } else { 0.0 };
        let ts = pu * pv;
        let td = dpu * pv;
        s += ts;
        d += td;
        let size = ts.abs().max(td.abs());
        biggest = biggest.max(size);
        if k > turning + 2.0 && size <= 1e-20 * biggest {
            quiet += 1;
            if quiet >= 20 {
                let norm = 1.0 / (2.0 * PI).sqrt();
                return Ok((s * norm, d * norm));
            }
        } else {
            quiet = 0;
        }
        wu.step();
        wv.step();
    }
    Err(Error::Numerical(format!("Mehler tail did not converge at u = {u}, v = {v}")))
}

/// `K_N - 𝒦_τ` at local coordinates, from the Mehler tail and the rank-one
/// correction. Subtracting two O(1) numbers would bottom out near 1e-16.
fn residual_block(k: &FiniteKernel, u: f64, v: f64) -> Result<KernelBlock> {
    let n = k.params().n;
    let tau = k.params().tau;
    let corr = k.correction();
    let rs = |a: f64, b: f64| -> Result<f64> {
        let (tail, _) = mehler_tail(tau, a, b, n - 1)?;
        let psi_b = weighted_hermite(n - 1, tau, b);
        Ok(-tail + corr * k.phi_hat(a)? * psi_b[n - 1])
    };
    let s_xy = rs(u, v)?;
    let s_yx = if u == v { s_xy } else { rs(v, u)? };
    if u == v {
        return Ok(KernelBlock { i_val: 0.0, s_xy, s_yx, d_val: 0.0 });
    }
    let (_, dtail) = mehler_tail(tau, u, v, n - 1)?;
    let psi_u = weighted_hermite(n - 1, tau, u);
    let psi_v = weighted_hermite(n - 1, tau, v);
    let d_val = -dtail + corr * 2.0 * psi_u[n - 2] * psi_v[n - 1];
    let phi_u = k.phi_hat(u)?;
    let quad = QuadratureSpec { abs_tol: f64::MIN_POSITIVE, rel_tol: 1e-8, ..*k.quad() };
    let integral = integrate(
        |w| {
            let (tail, _) = mehler_tail(tau, u, w, n - 1).unwrap_or((f64::NAN, f64::NAN));
            -tail + corr * phi_u * weighted_hermite(n - 1, tau, w)[n - 1]
        },
        u,
        v,
        &quad,
    )?;
    Ok(KernelBlock { i_val: -integral, s_xy, s_yx, d_val })
}

/// `‖K_N(x, y) - 𝒦_τ(√N (x - y))‖_F` over the 2×2 block, in local scaling.
pub fn residual(params: EllipticParams, x: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    let k = FiniteKernel::new(params, *quad)?;
    let r = (params.n as f64).sqrt();
    let b = residual_block(&k, r * x, r * y)?;
    let zero = KernelBlock { i_val: 0.0, s_xy: 0.0, s_yx: 0.0, d_val: 0.0 };
    Ok(b.frobenius_distance(&zero))
}
