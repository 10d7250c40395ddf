use thiserror::Error;

use crate::avoid::OnionDecomposition;
use crate::lp::LpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("target set is empty")]
    EmptySet,
    #[error("operation requires a convex set (ball, segment or hull)")]
    NonConvexSet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("mixed action supplied to a pure game")]
    KindMismatch,
    #[error("action index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("invalid mixed action: {0}")]
    InvalidAction(String),
    #[error("degenerate projection direction (distance {0:e})")]
    DegenerateDirection(f64),
    #[error("input must be strictly positive: {0}")]
    NonPositiveInput(&'static str),
    #[error("stage budget exhausted after {} stages", .0.stages.len())]
    StageBudgetExceeded(Box<OnionDecomposition>),
    #[error("drive exceeded its round cap: {rounds} > {cap}")]
    DriveOverrun { rounds: usize, cap: usize },
    #[error("drive precondition violated: {0}")]
    DrivePrecondition(String),
    #[error("no stored certificate near the current iterate (index {index})")]
    CertificateMiss { index: i64 },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
