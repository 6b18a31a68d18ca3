use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension cap exceeded: {requested} > {cap}")]
    DimensionCap { requested: usize, cap: usize },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid subsystem indices: {0}")]
    InvalidIndices(String),
    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bipartition is trivial")]
    TrivialBipartition,
    #[error("ensemble members have different shapes")]
    ShapeMismatch,
    #[error("amplitudes differ in magnitude: not envariant under this swap")]
    NotEnvariant,
    #[error("projectors do not commute")]
    NonCommuting,
    #[error("evolution time {t} beyond recurrence time {t_rec}")]
    BeyondRecurrence { t: f64, t_rec: f64 },
}

impl Error {
    /// True for errors caused by a size cap rather than a malformed input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::DimensionCap { .. } | Error::CapExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
