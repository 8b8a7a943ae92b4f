use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate basis")]
    DegenerateBasis,

    #[error("basis columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("sample too small for resolution: {expected:.3} expected points in the innermost inside ring")]
    SampleTooSmall { expected: f64 },

    #[error("degenerate slice: {inside} points inside, {outside} outside")]
    DegenerateSlice { inside: usize, outside: usize },

    #[error("no structure at start")]
    NoStructure,

    #[error("nothing to sample: cavity volume {cavity:.4} is not below ball volume {ball:.4}")]
    NothingToSample { cavity: f64, ball: f64 },

    #[error("singular angle configuration: sin(b-a) = {sin_diff:.3e}, sin(2(b-a)) = {sin_double:.3e}")]
    SingularAngle { sin_diff: f64, sin_double: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
