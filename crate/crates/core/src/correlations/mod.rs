//! Real correlation functions and the exact bridge between moments of
//! `|det(A_N - μ)|` and `ρ^ℓ_{N+ℓ}`.

mod bridge;

pub use bridge::{bridge_d, log_normalization, BridgeConstants};

use log::debug;

use crate::error::{domain, Error, Result};
use crate::kernels::{assemble, upper_blocks, EllipticParams, FiniteKernel, HatExpansion, KernelSource};
use crate::skewalg::{
    delta_limit, pfaffian_jet, pfaffian_real, vandermonde, JetShape, PfaffianValue, MAX_JET_HALF_DIM,
};
use crate::specfun::{integrate_real_line, QuadratureSpec};

/// Points closer than this are treated as coincident.
pub const MIN_SEPARATION: f64 = 1e-6;

fn check_distinct(points: &[f64]) -> Result<()> {
    for i in 0..points.len() {
        if !points[i].is_finite() {
            return domain(format!("point {} is not finite", points[i]));
        }
        for j in i + 1..points.len() {
            if (points[i] - points[j]).abs() < MIN_SEPARATION {
                return Err(Error::CoincidentPoints(points[i], points[j]));
            }
        }
    }
    Ok(())
}

/// `pf[K_N(u_i, u_j)]` at local coordinates.
fn local_pfaffian(kernel: &FiniteKernel, us: &[f64]) -> Result<PfaffianValue> {
    let blocks = upper_blocks(us.len(), |i, j| kernel.block_local(us[i], us[j]))?;
    Ok(pfaffian_real(&assemble(&blocks)?))
}

/// `ρ^ℓ_N(x_1, …, x_ℓ) = N^{ℓ/2} pf[K_N(x_i, x_j)]` at distinct points.
pub fn rho(params: EllipticParams, points: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    if points.is_empty() {
        return domain("need at least one point");
    }
    if points.len() > params.n {
        return domain(format!("ℓ = {} exceeds N = {}", points.len(), params.n));
    }
    check_distinct(points)?;
    let kernel = FiniteKernel::new(params, *quad)?;
    let r = (params.n as f64).sqrt();
    let us: Vec<f64> = points.iter().map(|x| r * x).collect();
    let pf = local_pfaffian(&kernel, &us)?;
    Ok(pf.sign * (pf.log_abs + points.len() as f64 / 2.0 * (params.n as f64).ln()).exp())
}

/// `∫_ℝ ρ^1_N`, the expected number of real eigenvalues.
pub fn expected_real_count(params: EllipticParams, quad: &QuadratureSpec) -> Result<f64> {
    let kernel = FiniteKernel::new(params, *quad)?;
    // in local units the one-point density is S(u, u)
    let density = |u: f64| kernel.s_local(u, u).unwrap_or(f64::NAN);
    let edge = (params.n as f64).sqrt() * params.edge();
    // past the edge the density is decreasing
    integrate_real_line(density, edge + 1.0, |t| 10.0 * density(t).abs(), quad)
}

/// Result of a moment evaluation in sign / log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogValue {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// `log E ∏_i |det(A_N - μ_i)|` at distinct `μ_i` via
/// `D_{N,ℓ} e^{N Σμ²/(2(1+τ))} ρ^ℓ_{N+ℓ}(μ̃) / |Δ(μ)|`, `μ̃ = μ √(N/(N+ℓ))`.
pub fn log_moment_distinct(params: EllipticParams, mus: &[f64], quad: &QuadratureSpec) -> Result<LogValue> {
    let ell = mus.len();
    if ell == 0 {
        return Ok(LogValue { sign: 1.0, log_abs: 0.0 });
    }
    EllipticParams::new(params.tau, params.n)?;
    check_distinct(mus)?;
    let n = params.n;
    let m = n + ell;
    let kernel = FiniteKernel::new(EllipticParams::new(params.tau, m)?, *quad)?;
    // √(N+ℓ) μ̃ = √N μ
    let us: Vec<f64> = mus.iter().map(|mu| (n as f64).sqrt() * mu).collect();
    let pf = local_pfaffian(&kernel, &us)?;
    let consts = bridge_d(n, ell, params.tau)?;
    let sum_sq: f64 = mus.iter().map(|x| x * x).sum();
    let log_abs = consts.log_d + n as f64 * sum_sq / (2.0 * (1.0 + params.tau)) + ell as f64 / 2.0 * (m as f64).ln()
        - vandermonde(mus).abs().ln()
        + pf.log_abs;
    Ok(LogValue { sign: pf.sign, log_abs })
}

pub fn moment_distinct(params: EllipticParams, mus: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    Ok(log_moment_distinct(params, mus, quad)?.value())
}

/// `log E|det(A_N - μ)|^ℓ` for integer `ℓ ≤ 6`.
///
/// The `ℓ` points are sent to `μ` through the frozen-sign kernel `K̂`: the
/// Pfaffian of the jet matrix about `u = √N μ` is reduced by the Vandermonde
/// limit. In local coordinates `Δ(μ) = N^{-ℓ(ℓ-1)/4} Δ(u)`, which supplies
/// the extra power of `N`.
pub fn log_moment_coincident(params: EllipticParams, mu: f64, ell: usize, quad: &QuadratureSpec) -> Result<LogValue> {
    if ell == 0 {
        return Ok(LogValue { sign: 1.0, log_abs: 0.0 });
    }
    if ell > MAX_JET_HALF_DIM {
        return domain(format!("coincident moments are limited to ℓ ≤ {MAX_JET_HALF_DIM}, got {ell}"));
    }
    if !mu.is_finite() {
        return domain("mu must be finite");
    }
    EllipticParams::new(params.tau, params.n)?;
    let n = params.n;
    let m = n + ell;
    let kernel = FiniteKernel::new(EllipticParams::new(params.tau, m)?, *quad)?;
    let u0 = (n as f64).sqrt() * mu;
    let limit = if ell == 1 {
        kernel.s_local(u0, u0)?
    } else {
        let shape = JetShape::for_limit(ell)?;
        let expansion = HatExpansion::new(KernelSource::Finite(&kernel), u0, ell - 1)?;
        delta_limit(&pfaffian_jet(&expansion.matrix(&shape)?)?)?
    };
    let (nf, lf) = (n as f64, ell as f64);
    let consts = bridge_d(n, ell, params.tau)?;
    let log_abs = consts.log_d
        + nf * lf * mu * mu / (2.0 * (1.0 + params.tau))
        + lf / 2.0 * (m as f64).ln()
        + lf * (lf - 1.0) / 4.0 * nf.ln()
        + limit.abs().ln();
    debug!("coincident limit N={n} ℓ={ell} μ={mu}: {limit}");
    Ok(LogValue { sign: limit.signum(), log_abs })
}

pub fn moment_coincident(params: EllipticParams, mu: f64, ell: usize, quad: &QuadratureSpec) -> Result<f64> {
    Ok(log_moment_coincident(params, mu, ell, quad)?.value())
}

/// Richardson extrapolation of `moment_distinct` along `μ + ε (1, …, ℓ)`
/// as `ε → 0`; an oracle for [`moment_coincident`].
///
/// Fails if the points leave the bulk, or if successive extrapolants stop
/// getting closer (a sign that `ε` is too large or rounding has taken over).
pub fn coincident_finite_difference_oracle(
    params: EllipticParams,
    mu: f64,
    ell: usize,
    epsilons: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    if ell <= 1 {
        let mus = vec![mu; ell];
        return moment_distinct(params, &mus, quad);
    }
    if epsilons.len() < 2 {
        return domain("need at least two step sizes");
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return domain("step sizes must be positive and strictly decreasing");
    }
    let edge = params.edge();
    if (mu + ell as f64 * epsilons[0]).abs() >= edge || mu.abs() >= edge {
        return Err(Error::Extrapolation(format!(
            "points μ + ε·(1..{ell}) leave the bulk (-{edge}, {edge}) at ε = {}",
            epsilons[0]
        )));
    }
    let values = epsilons
        .iter()
        .map(|eps| {
            let mus: Vec<f64> = (1..=ell).map(|i| mu + eps * i as f64).collect();
            moment_distinct(params, &mus, quad)
        })
        .collect::<Result<Vec<f64>>>()?;
    // Neville's table evaluated at ε = 0
    let k = values.len();
    let mut table = values.clone();
    let mut diagonal = vec![table[0]];
    for level in 1..k {
        for i in 0..k - level {
            let (e0, e1) = (epsilons[i], epsilons[i + level]);
            table[i] = (e0 * table[i + 1] - e1 * table[i]) / (e0 - e1);
        }
        diagonal.push(table[0]);
    }
    let steps: Vec<f64> = diagonal.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let settled = steps.last().copied().unwrap_or(0.0) <= 1e-10 * diagonal[k - 1].abs();
    if !settled && steps.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Extrapolation(format!("extrapolants are not converging: {diagonal:?}")));
    }
    Ok(diagonal[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn one_point_density_two_by_two() {
        let p = EllipticParams::new(0.0, 2).unwrap();
        assert_relative_eq!(rho(p, &[0.0], &q()).unwrap(), 1.0 / PI.sqrt(), max_relative = 1e-13);
        for x in [0.4f64, -1.1] {
            let want = (-2.0 * x * x).exp() / PI.sqrt() + x * (-x * x).exp() * crate::specfun::erf(x);
            assert_relative_eq!(rho(p, &[x], &q()).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn expected_count_two_by_two() {
        let p = EllipticParams::new(0.0, 2).unwrap();
        assert_relative_eq!(expected_real_count(p, &q()).unwrap(), 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn two_point_density_vanishes_on_diagonal() {
        let p = EllipticParams::new(0.5, 6).unwrap();
        let near = rho(p, &[0.3, 0.3 + 1e-4], &q()).unwrap();
        let far = rho(p, &[0.3, 0.6], &q()).unwrap();
        assert!(near.abs() < 1e-3 * far);
        assert!(rho(p, &[0.3, 0.3], &q()).is_err());
    }

    #[test]
    fn rho_symmetric_and_nonnegative() {
        let p = EllipticParams::new(0.5, 8).unwrap();
        let a = rho(p, &[0.2, -0.5, 0.9], &q()).unwrap();
        let b = rho(p, &[0.9, 0.2, -0.5], &q()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
        for pts in [[0.1, 0.2], [-1.0, 1.0], [0.0, 1.4]] {
            assert!(rho(p, &pts, &q()).unwrap() >= 0.0);
        }
    }

    #[test]
    fn first_moment_two_by_two() {
        let p = EllipticParams::new(0.0, 2).unwrap();
        assert_relative_eq!(moment_coincident(p, 0.0, 1, &q()).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(moment_distinct(p, &[0.0], &q()).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn distinct_moment_permutation_invariant() {
        let p = EllipticParams::new(0.3, 4).unwrap();
        let a = moment_distinct(p, &[0.1, -0.4, 0.6], &q()).unwrap();
        let b = moment_distinct(p, &[0.6, 0.1, -0.4], &q()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn second_moment_two_by_two() {
        // E det(A)^2 = 1/2 for the 2×2 real Ginibre matrix with variance 1/2
        let p = EllipticParams::new(0.0, 2).unwrap();
        assert_relative_eq!(moment_coincident(p, 0.0, 2, &q()).unwrap(), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn coincident_matches_extrapolation() {
        let p = EllipticParams::new(0.0, 4).unwrap();
        let exact = moment_coincident(p, 0.0, 2, &q()).unwrap();
        let oracle = coincident_finite_difference_oracle(p, 0.0, 2, &[1e-2, 5e-3, 2.5e-3], &q()).unwrap();
        assert!(((exact - oracle) / exact).abs() < 1e-4, "{exact} vs {oracle}");
        let p = EllipticParams::new(0.5, 5).unwrap();
        let exact = moment_coincident(p, 0.4, 3, &q()).unwrap();
        let oracle = coincident_finite_difference_oracle(p, 0.4, 3, &[2e-2, 1e-2, 5e-3, 2.5e-3], &q()).unwrap();
        assert!(((exact - oracle) / exact).abs() < 1e-4, "{exact} vs {oracle}");
    }

    #[test]
    fn oracle_single_point_is_direct() {
        let p = EllipticParams::new(0.2, 5).unwrap();
        let a = coincident_finite_difference_oracle(p, 0.3, 1, &[1e-2, 5e-3], &q()).unwrap();
        assert_eq!(a, moment_distinct(p, &[0.3], &q()).unwrap());
    }

    #[test]
    fn oracle_rejects_large_steps() {
        let p = EllipticParams::new(0.0, 4).unwrap();
        let err = coincident_finite_difference_oracle(p, 0.5, 3, &[0.5, 0.25], &q()).unwrap_err();
        assert!(matches!(err, Error::Extrapolation(_)));
    }
}
