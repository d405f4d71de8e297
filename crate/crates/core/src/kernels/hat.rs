use std::f64::consts::PI;
use std::sync::Arc;

use super::block::{assemble_jet, upper_blocks, JetBlock};
use super::finite::FiniteKernel;
use super::limit::limit_s_taylor;
use crate::error::{domain, Result};
use crate::skewalg::{Jet, JetShape, SkewMatrix};
use crate::specfun::weighted_hermite_taylor;

/// Which kernel to expand.
#[derive(Debug, Clone, Copy)]
pub enum KernelSource<'a> {
    Finite(&'a FiniteKernel),
    Limit { tau: f64 },
}

/// Bivariate Taylor data of `K̂` about a coincident base point `(u0, u0)`.
///
/// `s[p][q]` is the coefficient of `a^p b^q` in `S(u0+a, u0+b)`. The other
/// entries follow from it: `D = ∂_a S`, and
/// `∫_{u0+a}^{u0+b} S(u0+a, z) dz = Σ s_pq a^p (b^{q+1} - a^{q+1})/(q+1)`.
#[derive(Debug, Clone)]
pub struct HatExpansion {
    order: usize,
    s: Vec<Vec<f64>>,
}

impl HatExpansion {
    /// Expansion to per-variable order `order` about `u0`, in local units.
    pub fn new(source: KernelSource<'_>, u0: f64, order: usize) -> Result<Self> {
        let o = order + 1;
        let s = match source {
            KernelSource::Limit { tau } => {
                if !(0.0..1.0).contains(&tau) {
                    return domain(format!("tau must lie in [0, 1), got {tau}"));
                }
                // 𝒮(a - b) = Σ_n g_n (a-b)^n
                let g = limit_s_taylor(tau, 2 * o);
                let mut binom = vec![vec![0.0; 2 * o + 1]; 2 * o + 1];
                for n in 0..=2 * o {
                    binom[n][0] = 1.0;
                    for k in 1..=n {
                        binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
                    }
                }
                (0..=o)
                    .map(|p| {
                        (0..=o)
                            .map(|q| {
                                let sgn = if q % 2 == 0 { 1.0 } else { -1.0 };
                                g[p + q] * binom[p + q][p] * sgn
                            })
                            .collect()
                    })
                    .collect()
            }
            KernelSource::Finite(k) => {
                let n = k.params().n;
                let tau = k.params().tau;
                let t = weighted_hermite_taylor(n - 1, tau, u0, o);
                let mut phi = vec![0.0; o + 1];
                phi[0] = k.phi_hat(u0)?;
                for a in 1..=o {
                    phi[a] = 2.0 * t[n - 2][a - 1] / a as f64;
                }
                let corr = k.correction();
                let norm = 1.0 / (2.0 * PI).sqrt();
                (0..=o)
                    .map(|p| {
                        (0..=o)
                            .map(|q| {
                                let sum: f64 = t[..n - 1].iter().map(|tk| tk[p] * tk[q]).sum();
                                sum * norm + corr * phi[p] * t[n - 1][q]
                            })
                            .collect()
                    })
                    .collect()
            }
        };
        Ok(Self { order, s })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `S(u0+a, u0+b)` coefficients up to the working order.
    pub fn s_table(&self) -> Vec<Vec<f64>> {
        self.s[..=self.order].iter().map(|r| r[..=self.order].to_vec()).collect()
    }

    fn s_swapped(&self) -> Vec<Vec<f64>> {
        let o = self.order;
        (0..=o).map(|p| (0..=o).map(|q| self.s[q][p]).collect()).collect()
    }

    fn d_table(&self) -> Vec<Vec<f64>> {
        let o = self.order;
        (0..=o).map(|p| (0..=o).map(|q| (p + 1) as f64 * self.s[p + 1][q]).collect()).collect()
    }

    /// Coefficients of `∫_{u0+a}^{u0+b} S(u0+a, z) dz`.
    fn integral_table(&self) -> Vec<Vec<f64>> {
        let o = self.order;
        let mut f = vec![vec![0.0; o + 1]; o + 1];
        for p in 0..=o {
            for q in 0..=o {
                let c = self.s[p][q] / (q + 1) as f64;
                if q < o {
                    f[p][q + 1] += c;
                }
                if p + q < o {
                    f[p + q + 1][0] -= c;
                }
            }
        }
        f
    }

    /// Block `K̂(u0+δ_i, u0+δ_j)` with `sign(y-x)` frozen to `sign(i-j)`.
    pub fn block(&self, shape: &Arc<JetShape>, i: usize, j: usize) -> JetBlock {
        if i == j {
            let s = Jet::from_bivariate(shape, i, i, &self.s_table());
            return JetBlock { i_val: Jet::zero(shape), s_xy: s.clone(), s_yx: s, d_val: Jet::zero(shape) };
        }
        let frozen = if i > j { 0.5 } else { -0.5 };
        let integral = Jet::from_bivariate(shape, i, j, &self.integral_table());
        JetBlock {
            i_val: &Jet::constant(shape, frozen) - &integral,
            s_xy: Jet::from_bivariate(shape, i, j, &self.s_table()),
            s_yx: Jet::from_bivariate(shape, i, j, &self.s_swapped()),
            d_val: Jet::from_bivariate(shape, i, j, &self.d_table()),
        }
    }

    /// The `2ℓ × 2ℓ` jet matrix `[K̂(u0+δ_i, u0+δ_j)]`.
    pub fn matrix(&self, shape: &Arc<JetShape>) -> Result<SkewMatrix<Jet>> {
        let ell = shape.nvars();
        let blocks = upper_blocks(ell, |i, j| Ok(self.block(shape, i, j)))?;
        assemble_jet(&blocks, Jet::zero(shape))
    }
}

/// Jet block of `K̂` for points `i, j` about the coincident base `u0`, with
/// per-variable order `ℓ-1`.
pub fn kernel_hat_jet(source: KernelSource<'_>, u0: f64, i: usize, j: usize, ell: usize) -> Result<JetBlock> {
    if i >= ell || j >= ell {
        return domain(format!("point indices ({i}, {j}) out of range for ℓ = {ell}"));
    }
    let shape = JetShape::for_limit(ell)?;
    Ok(HatExpansion::new(source, u0, ell.saturating_sub(1))?.block(&shape, i, j))
}

/// Full jet matrix of `K̂` for `ℓ` points about `u0`.
pub fn kernel_hat_matrix(source: KernelSource<'_>, u0: f64, ell: usize) -> Result<SkewMatrix<Jet>> {
    if ell == 0 {
        return domain("need at least one point");
    }
    let shape = JetShape::for_limit(ell)?;
    HatExpansion::new(source, u0, ell - 1)?.matrix(&shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{limit_kernel, EllipticParams};
    use crate::skewalg::pfaffian_jet;
    use crate::specfun::QuadratureSpec;
    use approx::assert_relative_eq;

    fn finite(tau: f64, n: usize) -> FiniteKernel {
        FiniteKernel::new(EllipticParams::new(tau, n).unwrap(), QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn constant_terms_match_values() {
        let k = finite(0.4, 7);
        let u0 = 0.8;
        let b = kernel_hat_jet(KernelSource::Finite(&k), u0, 0, 1, 3).unwrap();
        assert_relative_eq!(b.s_xy.constant_term(), k.s_local(u0, u0).unwrap(), max_relative = 1e-13);
        assert_eq!(b.i_val.constant_term(), -0.5);
        assert!(b.d_val.constant_term().abs() < 1e-13);
        let b = kernel_hat_jet(KernelSource::Finite(&k), u0, 2, 0, 3).unwrap();
        assert_eq!(b.i_val.constant_term(), 0.5);
    }

    #[test]
    fn finite_jet_matches_point_values() {
        // evaluate the truncated series at small offsets against direct values
        let k = finite(0.3, 6);
        let u0 = 0.5;
        let exp = HatExpansion::new(KernelSource::Finite(&k), u0, 4).unwrap();
        let shape = JetShape::new(2, 4, 8).unwrap();
        let b = exp.block(&shape, 0, 1);
        let (a, c) = (0.01, -0.015);
        let direct = k.block_local(u0 + a, u0 + c).unwrap();
        assert!((b.s_xy.eval(&[a, c]) - direct.s_xy).abs() < 1e-9);
        assert!((b.s_yx.eval(&[a, c]) - direct.s_yx).abs() < 1e-9);
        assert!((b.d_val.eval(&[a, c]) - direct.d_val).abs() < 1e-9);
        // frozen sign equals the true sign here since u0+a > u0+c and i < j
        assert!((b.i_val.eval(&[a, c]) - direct.i_val).abs() < 1e-9);
    }

    #[test]
    fn limit_jet_matches_point_values() {
        let exp = HatExpansion::new(KernelSource::Limit { tau: 0.5 }, 0.0, 5).unwrap();
        let shape = JetShape::new(2, 5, 10).unwrap();
        let b = exp.block(&shape, 0, 1);
        let (a, c) = (0.02, -0.01);
        let direct = limit_kernel(0.5, a - c).unwrap();
        assert!((b.s_xy.eval(&[a, c]) - direct.s_xy).abs() < 1e-11);
        assert!((b.d_val.eval(&[a, c]) - direct.d_val).abs() < 1e-11);
        assert!((b.i_val.eval(&[a, c]) - direct.i_val).abs() < 1e-11);
    }

    #[test]
    fn ginibre_limit_second_order_coefficient() {
        let b = kernel_hat_jet(KernelSource::Limit { tau: 0.0 }, 0.0, 0, 1, 3).unwrap();
        let c = -1.0 / (2.0 * (2.0 * PI).sqrt());
        assert_eq!(b.s_xy.coefficient(&[1, 0, 0]), 0.0);
        assert_relative_eq!(b.s_xy.coefficient(&[2, 0, 0]), c);
        assert_relative_eq!(b.s_xy.coefficient(&[0, 2, 0]), c);
        assert_relative_eq!(b.s_xy.coefficient(&[1, 1, 0]), -2.0 * c);
    }

    #[test]
    fn pfaffian_vanishes_at_coincidence() {
        let m = kernel_hat_matrix(KernelSource::Limit { tau: 0.0 }, 0.0, 2).unwrap();
        assert!(pfaffian_jet(&m).unwrap().constant_term().abs() < 1e-15);
        let k = finite(0.5, 5);
        let m = kernel_hat_matrix(KernelSource::Finite(&k), 0.3, 3).unwrap();
        assert!(pfaffian_jet(&m).unwrap().constant_term().abs() < 1e-14);
    }
}
