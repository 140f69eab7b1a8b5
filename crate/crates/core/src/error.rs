use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative weight {value} at state index {index}")]
    NegativeWeight { index: usize, value: String },
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state spaces do not match ({0})")]
    SpaceMismatch(String),
    #[error("operation requires a totally ordered state space")]
    NotTotallyOrdered,
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("weights do not sum to one (sum = {0})")]
    NotNormalized(String),
    #[error("coupling middle margins disagree at index {0}")]
    MarginMismatch(usize),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("metric is not flagged linear")]
    NotLinear,
    #[error("level {level} is outside the window [{lo}, {hi}]")]
    LevelOutOfWindow { level: i32, lo: i32, hi: i32 },
    #[error("invalid level range: {0}")]
    InvalidLevels(String),
    #[error("state {0} is not in the state space")]
    UnknownState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("product space of {size} pairs exceeds the cap {cap}")]
    ProductCapExceeded { size: usize, cap: usize },
    #[error("truncation tail {tail:e} exceeds the bound {bound:e}")]
    TruncationTail { tail: f64, bound: f64 },
    #[error("transport solver failed: {0}")]
    Solver(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
