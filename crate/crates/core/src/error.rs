use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Domain and shape problems are separated from genuine numerical failures so
/// that front ends can map them to different exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not skew-symmetric: |A[{row}][{col}] + A[{col}][{row}]| = {defect:e}")]
    NotSkew { row: usize, col: usize, defect: f64 },

    #[error("dimension {0} is not even")]
    OddDimension(usize),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("coincident points {0} and {1}; use the coincident-limit path")]
    CoincidentPoints(f64, f64),

    #[error("jet order {have} is too low, need at least {need}")]
    JetOrder { have: usize, need: usize },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("eigenvalue pairing violated: {0}")]
    Pairing(String),
}

impl Error {
    /// True for errors caused by invalid input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NotSkew { .. }
                | Error::OddDimension(_)
                | Error::CoincidentPoints(..)
                | Error::JetOrder { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
