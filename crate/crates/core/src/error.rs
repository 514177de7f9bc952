use thiserror::Error;

/// Errors produced by the distribution-risk library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid support grid: {0}")]
    InvalidGrid(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("empty polytope: mean {mu} lies outside [{low}, {high}]")]
    EmptyPolytope { mu: f64, low: f64, high: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("pmfs are defined on different support grids")]
    GridMismatch,

    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),

    #[error("triangulation rejected: {0}")]
    InvalidTriangulation(String),

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("no-arbitrage violated: {0}")]
    ArbitrageViolation(String),

    #[error("invalid lattice factors: {0}")]
    InvalidFactors(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("root bracket not found for tilting parameter (last interval [{low}, {high}])")]
    BracketNotFound { low: f64, high: f64 },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("calibration degenerate: {0}")]
    CalibrationDegenerate(String),

    #[error("calibrated probability out of range: {0}")]
    ProbabilityOutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
