use thiserror::Error;

/// Coarse error category, used by front ends to choose exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidArgument,
    Numerical,
    Localization,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constructed or supplied state violates the uncertainty relation.
    /// `value` is the offending symplectic eigenvalue (or ordinary eigenvalue
    /// when the matrix is not even positive definite).
    #[error("unphysical state: {quantity} = {value:.6e} violates the bona fide bound")]
    Unphysical { quantity: &'static str, value: f64 },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("decomposition failure: reconstruction residual {residual:.3e} exceeds {tol:.3e}")]
    DecompositionFailure { residual: f64, tol: f64 },

    #[error("inconsistent invariants: {0}")]
    InconsistentInvariants(String),

    #[error("localization failure: {reason} (residual {residual:.3e}, tolerance {tol:.3e})")]
    LocalizationFailure {
        reason: String,
        residual: f64,
        tol: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_)
            | Error::Unphysical { .. }
            | Error::InconsistentInvariants(_)
            | Error::Parse { .. } => ErrorKind::InvalidArgument,
            Error::NumericalDomain(_) | Error::DecompositionFailure { .. } => ErrorKind::Numerical,
            Error::LocalizationFailure { .. } => ErrorKind::Localization,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::NumericalDomain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
