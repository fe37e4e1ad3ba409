//! Error type shared by all modules.

use thiserror::Error;

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input itself is malformed or violates a domain invariant.
    Input,
    /// The computation failed numerically (non-convergence, lost decay, ...).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("not a symmetric positive definite matrix: {0}")]
    NotSpd(String),

    #[error("function fails the log-concave class checks: {0}")]
    NotInClass(String),

    #[error("boundary decay check failed on {face}: max |value| = {max_abs:.3e} exceeds {limit:.1e}")]
    DecayCheckFailed {
        face: String,
        max_abs: f64,
        limit: f64,
    },

    #[error("query outside the grid box: {0}")]
    OutOfDomain(String),

    #[error("Legendre transform rejected: {0}")]
    DegenerateTransform(String),

    #[error("matrix numerically singular (condition number {0:.3e})")]
    NearSingular(f64),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(
        "dropped quadrature mass {dropped:.3e} exceeds budget {limit:.3e} for p = {p}; \
         resolution too coarse for this function"
    )]
    ExcludedMassTooLarge { dropped: f64, limit: f64, p: f64 },

    #[error("solver did not converge in {max_iter} iterations (residual {residual:.3e})")]
    NonConvergence { max_iter: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("effective sample size too small: {ess:.1} of {n} samples")]
    LowEffectiveSampleSize { ess: f64, n: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidGrid(_)
            | Error::NotSpd(_)
            | Error::NotInClass(_)
            | Error::Unsupported(_)
            | Error::InvalidParameter(_) => ErrorKind::Input,
            Error::DecayCheckFailed { .. }
            | Error::OutOfDomain(_)
            | Error::DegenerateTransform(_)
            | Error::NearSingular(_)
            | Error::ExcludedMassTooLarge { .. }
            | Error::NonConvergence { .. }
            | Error::LowEffectiveSampleSize { .. } => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
