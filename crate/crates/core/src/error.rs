use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular linear map")]
    SingularMap,
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("not spectral: {0}")]
    NotSpectral(String),
    #[error("condition not met: {0}")]
    ConditionNotMet(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("segments are collinear")]
    Collinear,
    #[error("segments overlap in positive length")]
    Overlap,
    #[error("zero-length segment")]
    ZeroLength,
    #[error("lambda = 0 is never a zero of a positive measure's transform")]
    ZeroFrequency,
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
