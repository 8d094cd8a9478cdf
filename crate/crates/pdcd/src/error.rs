//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("explicit zero stored at ({row}, {col}); zeros must be structural")]
    ExplicitZero { row: usize, col: usize },
    #[error("index ({row}, {col}) out of range for a {d}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, d: usize, n: usize },
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("input contains no examples")]
    EmptyFile,
    #[error("column {0} is all zero")]
    ZeroColumn(usize),
    #[error("sampling over an empty support")]
    ZeroSize,
    #[error("sampling weight {0} at index {1} is not strictly positive")]
    NonpositiveWeight(f64, usize),
    #[error("sampling is not proper: probability {0} at index {1}")]
    ImproperSampling(f64, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("loss family has no closed-form dual coordinate maximizer")]
    UnsupportedLoss,
    #[error("epsilon {eps} outside (0, {limit})")]
    BadEpsilon { eps: f64, limit: f64 },
    #[error("nnz target {alpha} infeasible for a {d}x{n} matrix with nonzero rows and columns")]
    InfeasibleAlpha { alpha: u64, d: usize, n: usize },
    #[error("cannot avoid a zero row: nnz target {alpha} < d = {d}")]
    CannotAvoidZeroRow { alpha: u64, d: usize },
    #[error("matrix has a zero {0}")]
    ZeroRowOrColumn(&'static str),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("exhaustive enumeration limited to d*n <= {limit}, got {got}")]
    TooLarge { got: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
