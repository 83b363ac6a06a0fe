use alloc::string::String;
use core::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A matrix that must be symmetric positive definite is not; carries the
    /// offending minimum eigenvalue (or failed Cholesky pivot).
    NotPd { min_eig: f64 },
    /// An input contained NaN or infinity.
    NotFinite,
    /// Matrix or index dimensions do not line up.
    DimensionMismatch { expected: usize, got: usize },
    /// A graph description is unusable (self-loop, duplicate edge, index out
    /// of range, nonpositive weight, ...).
    BadGraph(String),
    /// The exact theory diagnostics are quadratic-size in `p^2` and are
    /// capped; asked for `p`, supported up to `max`.
    UnsupportedSize { p: usize, max: usize },
    /// The restricted Kronecker block is numerically singular (condition
    /// number above 1e12), so the incoherence quantity is not computable.
    SingularBlock { cond: f64 },
    /// An operation that needs at least one off-diagonal edge got a model
    /// with none.
    NoEdges,
    /// A configuration value is out of its documented range.
    InvalidConfig(String),
    /// Not enough data points for a fit (e.g. a rate check needs >= 3
    /// sample sizes).
    InsufficientData { needed: usize, got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPd { min_eig } => {
                write!(f, "matrix is not positive definite (min eigenvalue {min_eig:e})")
            }
            Error::NotFinite => write!(f, "input contains NaN or infinite entries"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::BadGraph(msg) => write!(f, "bad graph: {msg}"),
            Error::UnsupportedSize { p, max } => {
                write!(f, "exact diagnostics support p <= {max}, got p = {p}")
            }
            Error::SingularBlock { cond } => {
                write!(f, "restricted Hessian block is singular (cond {cond:e})")
            }
            Error::NoEdges => write!(f, "model has no off-diagonal edges"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need {needed}, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
