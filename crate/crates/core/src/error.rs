use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("non-finite nonlinearity at node {node}: f({u:e}, {p:e}) = {value}")]
    NonFiniteNonlinearity { node: usize, u: f64, p: f64, value: f64 },

    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    #[error("unknown problem id `{id}` (valid: {valid})")]
    UnknownProblem { id: String, valid: String },

    #[error("unknown method id `{id}` (valid: {valid})")]
    UnknownMethod { id: String, valid: String },

    #[error("stability violation: reference step {tau:e} exceeds h^2/4 = {limit:e}")]
    StabilityViolation { tau: f64, limit: f64 },

    #[error("step size {tau} does not tile [0, {t_final}]")]
    NonTilingStep { tau: f64, t_final: f64 },

    #[error("observed order undefined: fewer than two positive errors")]
    UndefinedOrder,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::NonFiniteNonlinearity { .. }
                | Error::NonFiniteState { .. }
                | Error::StabilityViolation { .. }
        )
    }
}
