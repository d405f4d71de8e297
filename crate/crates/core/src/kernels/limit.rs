use std::f64::consts::PI;

use super::block::KernelBlock;
use crate::error::{domain, Result};
use crate::specfun::erf;

/// Translation-invariant bulk limit `𝒦_τ` at separation `u = u_1 - u_2`.
///
/// `𝒮_τ(u) = e^{-u²/(2(1-τ²))} / √(2π(1-τ²))`, `𝒟_τ = 𝒮_τ'`, and
/// `𝓘_τ(u) = -½ sign(u) + ∫_0^u 𝒮_τ`. `𝓗` is the case `τ = 0`.
pub fn limit_kernel(tau: f64, u: f64) -> Result<KernelBlock> {
    if !(0.0..1.0).contains(&tau) {
        return domain(format!("tau must lie in [0, 1), got {tau}"));
    }
    let var = 1.0 - tau * tau;
    let s = (-u * u / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    let sgn = if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    };
    Ok(KernelBlock { i_val: -0.5 * sgn + 0.5 * erf(u / (2.0 * var).sqrt()), s_xy: s, s_yx: s, d_val: -u / var * s })
}

/// Taylor coefficients of `𝒮_τ` at 0 up to degree `order`.
pub(crate) fn limit_s_taylor(tau: f64, order: usize) -> Vec<f64> {
    let var = 1.0 - tau * tau;
    let c = 1.0 / (2.0 * PI * var).sqrt();
    let mut out = vec![0.0; order + 1];
    let mut term = c;
    for m in 0..=order / 2 {
        if m > 0 {
            term *= -1.0 / (2.0 * var) / m as f64;
        }
        out[2 * m] = term;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ginibre_value_at_zero() {
        let k = limit_kernel(0.0, 0.0).unwrap();
        assert_relative_eq!(k.s_xy, 1.0 / (2.0 * PI).sqrt());
        assert_eq!(k.i_val, 0.0);
        assert_eq!(k.d_val, 0.0);
    }

    #[test]
    fn i_saturates() {
        for tau in [0.0, 0.6] {
            assert!(limit_kernel(tau, 40.0).unwrap().i_val.abs() < 1e-15);
            assert!(limit_kernel(tau, -40.0).unwrap().i_val.abs() < 1e-15);
        }
    }

    #[test]
    fn conjugation_to_ginibre() {
        // diag(1, c) 𝒦_τ(u c) diag(1, c) = 𝓗(u), c = √(1-τ²)
        let tau: f64 = 0.6;
        let c = (1.0 - tau * tau).sqrt();
        for u in [0.0, 0.5, 2.0, -1.3] {
            let kt = limit_kernel(tau, u * c).unwrap().matrix();
            let h = limit_kernel(0.0, u).unwrap().matrix();
            let scale = [[1.0, c], [c, c * c]];
            for a in 0..2 {
                for b in 0..2 {
                    assert!((kt[a][b] * scale[a][b] - h[a][b]).abs() < 1e-12, "u={u} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn d_is_derivative() {
        let (tau, u, h) = (0.3, 0.7, 1e-6);
        let fd = (limit_kernel(tau, u + h).unwrap().s_xy - limit_kernel(tau, u - h).unwrap().s_xy) / (2.0 * h);
        assert!((fd - limit_kernel(tau, u).unwrap().d_val).abs() < 1e-9);
        let fi = (limit_kernel(tau, u + h).unwrap().i_val - limit_kernel(tau, u - h).unwrap().i_val) / (2.0 * h);
        assert!((fi - limit_kernel(tau, u).unwrap().s_xy).abs() < 1e-9);
    }

    #[test]
    fn taylor_coefficients() {
        let t = limit_s_taylor(0.0, 4);
        assert_relative_eq!(t[0], 1.0 / (2.0 * PI).sqrt());
        assert_eq!(t[1], 0.0);
        assert_relative_eq!(t[2], -1.0 / (2.0 * (2.0 * PI).sqrt()));
        assert_relative_eq!(t[4], 1.0 / (8.0 * (2.0 * PI).sqrt()));
    }
}
