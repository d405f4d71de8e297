use super::jet::{Jet, JetShape};
use crate::error::{Error, Result};
use crate::specfun::log_factorial;

/// `Δ(μ) = ∏_{i<j} (μ_i - μ_j)`.
pub fn vandermonde(points: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            p *= points[i] - points[j];
        }
    }
    p
}

/// `∂_Δ Δ = ∏_{i=1}^{ℓ+1} Γ(i) = ∏_{k=0}^{ℓ} k!`, in log form.
pub fn log_vandermonde_norm(ell: usize) -> f64 {
    (0..=ell).map(log_factorial).sum()
}

/// Jet of `Δ(δ_1, …, δ_ℓ)` in the given shape.
pub fn vandermonde_jet(shape: &std::sync::Arc<JetShape>) -> Jet {
    let ell = shape.nvars();
    let mut p = Jet::constant(shape, 1.0);
    for i in 0..ell {
        for j in i + 1..ell {
            let diff = &Jet::variable(shape, i, 0.0) - &Jet::variable(shape, j, 0.0);
            p = &p * &diff;
        }
    }
    p
}

/// Limit of `f/Δ` at the expansion point, given the Taylor jet of `f`.
///
/// Applies `∂_Δ = ∏_{i<j}(∂_i - ∂_j)` at the origin: each monomial
/// `c_α δ^α` of `Δ` contributes `c_α α! f_α`. The result is divided by
/// `∂_Δ Δ`.
pub fn delta_limit(f: &Jet) -> Result<f64> {
    let shape = f.shape();
    let ell = shape.nvars();
    let need_order = ell - 1;
    let need_total = ell * need_order / 2;
    if shape.order() < need_order {
        return Err(Error::JetOrder { have: shape.order(), need: need_order });
    }
    if shape.max_total() < need_total {
        return Err(Error::JetOrder { have: shape.max_total(), need: need_total });
    }
    let delta = vandermonde_jet(shape);
    let mut total = 0.0;
    for (idx, &c) in delta.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let exps = shape.exponents(idx);
        let alpha_fact: f64 = exps.iter().map(|&e| log_factorial(e).exp()).product();
        total += c * alpha_fact * f.coeffs()[idx];
    }
    Ok(total / log_vandermonde_norm(ell).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_products() {
        assert_eq!(vandermonde(&[2.0, 1.0]), 1.0);
        assert_eq!(vandermonde(&[1.0, 1.0, 3.0]), 0.0);
        assert_eq!(vandermonde(&[3.0, 2.0, 1.0]), 2.0);
        assert_eq!(vandermonde(&[0.5]), 1.0);
    }

    #[test]
    fn norm_matches_coefficients() {
        // Σ c_α² α! = ∏ k!
        for ell in 1..=5 {
            let shape = JetShape::for_limit(ell).unwrap();
            let d = vandermonde_jet(&shape);
            let s: f64 = d
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * c * shape.exponents(i).iter().map(|&e| log_factorial(e).exp()).product::<f64>())
                .sum();
            assert_relative_eq!(s, log_vandermonde_norm(ell).exp(), max_relative = 1e-12);
        }
        assert_eq!(log_vandermonde_norm(2).exp().round(), 2.0);
        assert_eq!(log_vandermonde_norm(3).exp().round(), 12.0);
    }

    #[test]
    fn limit_of_vandermonde_is_one() {
        for ell in 1..=4 {
            let shape = JetShape::for_limit(ell).unwrap();
            assert_relative_eq!(delta_limit(&vandermonde_jet(&shape)).unwrap(), 1.0, max_relative = 1e-14);
        }
    }

    fn exp_jet(shape: &std::sync::Arc<JetShape>, v: usize) -> Jet {
        let c: Vec<f64> = (0..=shape.order()).map(|k| 1.0 / log_factorial(k).exp()).collect();
        Jet::from_bivariate(shape, v, v, &[c])
    }

    #[test]
    fn two_point_examples() {
        let shape = JetShape::for_limit(2).unwrap();
        let diff = vandermonde_jet(&shape);
        let f = &(&diff * &exp_jet(&shape, 0)) * &exp_jet(&shape, 1);
        assert_relative_eq!(delta_limit(&f).unwrap(), 1.0, max_relative = 1e-14);
        let sum = &Jet::variable(&shape, 0, 0.0) + &Jet::variable(&shape, 1, 0.0);
        assert!(delta_limit(&(&diff * &sum)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn agrees_with_ray_extrapolation() {
        // f = Δ(δ) · g(δ) with g smooth and g(0) = 1
        let ell = 3;
        let g = |d: &[f64]| (0.2 * d[0] + 0.1 * d[1] - 0.1 * d[2]).exp() * (1.0 + 0.01 * d[0] * d[2]) + 0.25 * d[1];
        let f = |d: &[f64]| vandermonde(d) * g(d);
        let ratio = |eps: f64| {
            let d: Vec<f64> = (1..=ell).map(|i| eps * i as f64).collect();
            f(&d) / vandermonde(&d)
        };
        let (a, b) = (ratio(1e-2), ratio(5e-3));
        let extrapolated = 2.0 * b - a;

        // Taylor jet of f built in the ring
        let shape = JetShape::for_limit(ell).unwrap();
        let x = |v| Jet::variable(&shape, v, 0.0);
        let lin = &(&x(0).scale(0.2) + &x(1).scale(0.1)) - &x(2).scale(0.1);
        let mut e = Jet::constant(&shape, 1.0);
        let mut term = Jet::constant(&shape, 1.0);
        for k in 1..=shape.max_total() {
            term = (&term * &lin).scale(1.0 / k as f64);
            e += &term;
        }
        let g_jet = &(&e * &(&Jet::constant(&shape, 1.0) + &(&x(0) * &x(2)).scale(0.01))) + &x(1).scale(0.25);
        let f_jet = &vandermonde_jet(&shape) * &g_jet;
        let lim = delta_limit(&f_jet).unwrap();
        assert!((lim - extrapolated).abs() < 1e-5, "{lim} vs {extrapolated}");
        assert_relative_eq!(lim, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn ordering_convention_cancels() {
        // reversing the points flips both f and Δ
        let shape = JetShape::for_limit(2).unwrap();
        let rev = &Jet::variable(&shape, 1, 0.0) - &Jet::variable(&shape, 0, 0.0);
        assert_relative_eq!(delta_limit(&rev).unwrap(), -1.0);
    }

    #[test]
    fn low_order_rejected() {
        let shape = JetShape::new(3, 1, 3).unwrap();
        assert!(matches!(delta_limit(&Jet::zero(&shape)), Err(Error::JetOrder { .. })));
    }
}
