//! Special functions used by the kernels and the moment formulas.
//!
//! Hermite-type polynomials `C_k` with their Gaussian-weighted, factorial
//! normalised companions, the antiderivative `phi_n`, Gamma/Barnes-G
//! logarithms, and a small adaptive Gauss–Kronrod integrator.

mod barnes;
mod bound;
mod gamma;
mod hermite;
mod quadrature;

pub use barnes::{log_barnes_g, log_barnes_g_ratio_asymptotic};
pub use bound::{bound_rate, cramer_rate, cramer_rate_potential};
pub use gamma::{erf, erfc, log_factorial, log_gamma};
pub use hermite::{
    hermite_c, hermite_c_scaled, log_phi_constant, phi, phi_scaled, weighted_hermite, weighted_hermite_taylor,
    HermiteEval,
};
pub use quadrature::{integrate, integrate_real_line, integrate_to_infinity, QuadratureSpec};
