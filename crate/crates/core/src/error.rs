use thiserror::Error;

/// Errors raised by construction and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(usize),

    #[error("parallel edges between {u} and {v} carry conflicting signs")]
    SignConflict { u: usize, v: usize },

    #[error("operator is not self-adjoint under the stationary inner product (asymmetry {0:.3e})")]
    NotSelfAdjoint(f64),

    #[error("enumeration too large: about {estimate:.3e} candidate maps exceeds cap {cap}; use sampled mode")]
    EnumerationTooLarge { estimate: f64, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spectral premise fails: rho = {rho:.6} is not below epsilon = {epsilon:.6}")]
    SpectralPremise { rho: f64, epsilon: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance too large for exhaustive search: {n} variables exceeds cap {cap}")]
    TooLargeForBruteForce { n: usize, cap: usize },

    #[error("dense matrix of order {order} exceeds the materialization cap {cap}")]
    TooLargeForDense { order: usize, cap: usize },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
