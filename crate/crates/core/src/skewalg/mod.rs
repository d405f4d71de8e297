//! Skew-symmetric linear algebra: real Pfaffians in log form, Pfaffians over
//! truncated Taylor jets, and the Vandermonde limit operator.
//!
//! Convention: `Δ(μ) = ∏_{i<j}(μ_i - μ_j)` and `∂_Δ = ∏_{i<j}(∂_i - ∂_j)`.

mod jet;
mod pfaffian;
mod vandermonde;

pub use jet::{Jet, JetShape};
pub use pfaffian::{pfaffian_jet, pfaffian_real, PfaffianValue, SkewMatrix, MAX_JET_HALF_DIM, SKEW_TOL};
pub use vandermonde::{delta_limit, log_vandermonde_norm, vandermonde, vandermonde_jet};
