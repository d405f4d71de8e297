use std::f64::consts::PI;

use super::block::{EllipticParams, KernelBlock};
use crate::error::Result;
use crate::specfun::{integrate, phi_scaled, weighted_hermite, QuadratureSpec};

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The finite-`N` kernel in the local variable `u = √N x`.
///
/// `S(u, v) = (2π)^{-1/2} Σ_{k≤N-2} ψ_k(u) ψ_k(v)
///          + √(N-1) φ̂_{N-2}(u) ψ_{N-1}(v) / (2√(2π)(1+τ))`,
/// `D = ∂_u S` and `I(u, v) = ½ sign(v-u) - ∫_u^v S(u, w) dw`.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    params: EllipticParams,
    quad: QuadratureSpec,
}

impl FiniteKernel {
    pub fn new(params: EllipticParams, quad: QuadratureSpec) -> Result<Self> {
        let params = EllipticParams::new(params.tau, params.n)?;
        quad.validate()?;
        Ok(Self { params, quad })
    }

    pub fn params(&self) -> EllipticParams {
        self.params
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// Coefficient `√(N-1) / (2√(2π)(1+τ))` of the rank-one correction.
    pub(crate) fn correction(&self) -> f64 {
        ((self.params.n - 1) as f64).sqrt() / (2.0 * (2.0 * PI).sqrt() * (1.0 + self.params.tau))
    }

    /// `φ_{N-2}(u) / √((N-2)!)`.
    pub(crate) fn phi_hat(&self, u: f64) -> Result<f64> {
        phi_scaled(self.params.n - 2, self.params.tau, u, &self.quad)
    }

    fn s_with(&self, psi_u: &[f64], phi_u: f64, v: f64) -> f64 {
        let n = self.params.n;
        let psi_v = weighted_hermite(n - 1, self.params.tau, v);
        let sum: f64 = psi_u[..n - 1].iter().zip(&psi_v).map(|(a, b)| a * b).sum();
        sum / (2.0 * PI).sqrt() + self.correction() * phi_u * psi_v[n - 1]
    }

    pub fn s_local(&self, u: f64, v: f64) -> Result<f64> {
        let psi_u = weighted_hermite(self.params.n - 1, self.params.tau, u);
        Ok(self.s_with(&psi_u, self.phi_hat(u)?, v))
    }

    /// `∂_u S(u, v)` from `ψ_k' = -u ψ_k/(1+τ) + √k ψ_{k-1}` and `φ̂' = 2ψ`.
    pub fn d_local(&self, u: f64, v: f64) -> Result<f64> {
        let n = self.params.n;
        let tau = self.params.tau;
        let psi_u = weighted_hermite(n - 1, tau, u);
        let psi_v = weighted_hermite(n - 1, tau, v);
        let mut sum = 0.0;
        for k in 0..n - 1 {
            let mut dk = -u / (1.0 + tau) * psi_u[k];
            if k > 0 {
                dk += (k as f64).sqrt() * psi_u[k - 1];
            }
            sum += dk * psi_v[k];
        }
        Ok(sum / (2.0 * PI).sqrt() + self.correction() * 2.0 * psi_u[n - 2] * psi_v[n - 1])
    }

    /// `∫_u^v S(u, w) dw`.
    pub(crate) fn s_integral(&self, u: f64, v: f64) -> Result<f64> {
        if u == v {
            return Ok(0.0);
        }
        let psi_u = weighted_hermite(self.params.n - 1, self.params.tau, u);
        let phi_u = self.phi_hat(u)?;
        integrate(|w| self.s_with(&psi_u, phi_u, w), u, v, &self.quad)
    }

    pub fn i_local(&self, u: f64, v: f64) -> Result<f64> {
        Ok(0.5 * sign(v - u) - self.s_integral(u, v)?)
    }

    pub fn block_local(&self, u: f64, v: f64) -> Result<KernelBlock> {
        if u == v {
            let s = self.s_local(u, u)?;
            return Ok(KernelBlock { i_val: 0.0, s_xy: s, s_yx: s, d_val: 0.0 });
        }
        Ok(KernelBlock {
            i_val: self.i_local(u, v)?,
            s_xy: self.s_local(u, v)?,
            s_yx: self.s_local(v, u)?,
            d_val: self.d_local(u, v)?,
        })
    }

    fn scale(&self) -> f64 {
        (self.params.n as f64).sqrt()
    }
}

/// `S_N(x, y)`.
pub fn s_n(params: EllipticParams, x: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    let k = FiniteKernel::new(params, *quad)?;
    k.s_local(k.scale() * x, k.scale() * y)
}

/// `D_N(x, y) = ∂_x S_N(x, y)`.
pub fn d_n(params: EllipticParams, x: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    let k = FiniteKernel::new(params, *quad)?;
    Ok(k.scale() * k.d_local(k.scale() * x, k.scale() * y)?)
}

/// `I_N(x, y) = ½ sign(y-x) - ∫_x^y S_N(x, z) dz`.
pub fn i_n(params: EllipticParams, x: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    let k = FiniteKernel::new(params, *quad)?;
    let integral = k.s_integral(k.scale() * x, k.scale() * y)? / k.scale();
    Ok(0.5 * sign(y - x) - integral)
}

/// Block of the kernel at `(x, y)` in the local scaling `u = √N x`, the form
/// that enters `ρ^ℓ_N = N^{ℓ/2} pf[K]` and converges to the limit kernel.
///
/// It differs from `[[-I_N, S_N], [-S_N, D_N]]` by the diagonal conjugation
/// `diag(N^{1/4}, N^{-1/4})`, which leaves every Pfaffian unchanged.
pub fn kernel_block_n(params: EllipticParams, x: f64, y: f64, quad: &QuadratureSpec) -> Result<KernelBlock> {
    let k = FiniteKernel::new(params, *quad)?;
    k.block_local(k.scale() * x, k.scale() * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::assemble;
    use crate::skewalg::pfaffian_real;
    use crate::specfun::erf;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn s2_ginibre(x: f64, y: f64) -> f64 {
        let (u, v) = (2f64.sqrt() * x, 2f64.sqrt() * y);
        (-(u * u + v * v) / 2.0).exp() / (2.0 * PI).sqrt() + v / 2.0 * (-v * v / 2.0).exp() * erf(u / 2f64.sqrt())
    }

    #[test]
    fn two_by_two_ginibre_closed_form() {
        let p = EllipticParams::new(0.0, 2).unwrap();
        assert_relative_eq!(s_n(p, 0.0, 0.0, &q()).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-14);
        for (x, y) in [(1.0, 1.0), (0.3, -0.7), (-1.2, 0.4)] {
            assert_relative_eq!(s_n(p, x, y, &q()).unwrap(), s2_ginibre(x, y), max_relative = 1e-10);
        }
    }

    #[test]
    fn mehler_partial_sum_approaches_limit() {
        // (2π)^{-1/2} Σ_{k≤N-2} ψ_k(u)ψ_k(v) → S_τ(u - v)
        let (tau, n) = (0.5, 100);
        let (x, y) = (0.1, 0.12);
        let (u, v) = ((n as f64).sqrt() * x, (n as f64).sqrt() * y);
        let pu = weighted_hermite(n - 2, tau, u);
        let pv = weighted_hermite(n - 2, tau, v);
        let partial: f64 = pu.iter().zip(&pv).map(|(a, b)| a * b).sum::<f64>() / (2.0 * PI).sqrt();
        let lim = crate::kernels::limit_kernel(tau, u - v).unwrap().s_xy;
        assert!((partial - lim).abs() < 1e-8);
    }

    #[test]
    fn d_is_antisymmetric() {
        let p = EllipticParams::new(0.5, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = rng.random_range(-1.2..1.2);
            let y = rng.random_range(-1.2..1.2);
            let a = d_n(p, x, y, &q()).unwrap();
            let b = d_n(p, y, x, &q()).unwrap();
            assert!((a + b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn i_is_antisymmetric() {
        let p = EllipticParams::new(0.3, 7).unwrap();
        for (x, y) in [(0.2, -0.5), (1.0, 0.1), (-0.9, 0.9)] {
            let a = i_n(p, x, y, &q()).unwrap();
            let b = i_n(p, y, x, &q()).unwrap();
            assert!((a + b).abs() < 1e-10, "{a} {b}");
        }
        assert_eq!(i_n(p, 0.4, 0.4, &q()).unwrap(), 0.0);
    }

    #[test]
    fn d_matches_finite_difference() {
        let p = EllipticParams::new(0.25, 8).unwrap();
        let (x, y, h) = (0.3, -0.2, 1e-5);
        let fd = (s_n(p, x + h, y, &q()).unwrap() - s_n(p, x - h, y, &q()).unwrap()) / (2.0 * h);
        assert!((fd - d_n(p, x, y, &q()).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn i_derivative_identity() {
        // ∂_x I_N = S_N(x,x) - ∫_x^y ∂_x S_N(x,z) dz, checked against ∂_x I_N = S_N(x,x) - ∫ D_N
        let p = EllipticParams::new(0.4, 5).unwrap();
        let (x, y, h) = (0.2, 0.7, 1e-5);
        let fd = (i_n(p, x + h, y, &q()).unwrap() - i_n(p, x - h, y, &q()).unwrap()) / (2.0 * h);
        let int_d = integrate(|z| d_n(p, x, z, &q()).unwrap(), x, y, &q()).unwrap();
        let want = s_n(p, x, x, &q()).unwrap() - int_d;
        assert!((fd - want).abs() < 1e-6, "{fd} vs {want}");
    }

    #[test]
    fn diagonal_block_structure() {
        let p = EllipticParams::new(0.5, 10).unwrap();
        let b = kernel_block_n(p, 0.4, 0.4, &q()).unwrap();
        assert_eq!(b.i_val, 0.0);
        assert_eq!(b.d_val, 0.0);
        assert_eq!(b.s_xy, b.s_yx);
        let m = assemble(&[vec![b]]).unwrap();
        assert_relative_eq!(pfaffian_real(&m).value(), s_n(p, 0.4, 0.4, &q()).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn assembled_matrix_is_skew() {
        let p = EllipticParams::new(0.5, 10).unwrap();
        let xs = [0.3, -0.6, 1.1];
        let k = FiniteKernel::new(p, q()).unwrap();
        let rn = 10f64.sqrt();
        let mut dense = vec![0.0; 36];
        for i in 0..3 {
            for j in 0..3 {
                let b = k.block_local(rn * xs[i], rn * xs[j]).unwrap().matrix();
                for a in 0..2 {
                    for c in 0..2 {
                        dense[(2 * i + a) * 6 + 2 * j + c] = b[a][c];
                    }
                }
            }
        }
        for r in 0..6 {
            for c in 0..6 {
                assert!((dense[r * 6 + c] + dense[c * 6 + r]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(s_n(EllipticParams { tau: 0.0, n: 1 }, 0.0, 0.0, &q()).is_err());
    }
}
