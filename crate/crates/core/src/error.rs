use thiserror::Error;

use crate::estimate::Method;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("read failed: {0}")]
    Io(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: negative value {value}")]
    NegativeOnLine { line: usize, value: f64 },
    #[error("observation {index}: negative value {value}")]
    Negative { index: usize, value: f64 },
    #[error("observation {index}: value is not finite")]
    NonFinite { index: usize },
    #[error("tally row {index} holds no observations")]
    EmptyRow { index: usize },
    #[error("tally row {index} is not strictly above the previous value")]
    Unsorted { index: usize },
    #[error("no observations")]
    Empty,
    #[error("all observations are censored; no estimator can be proposed")]
    AllCensored,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("probability {0} is outside (0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("step function has no jumps")]
    NoJumps,
    #[error("expected a {expected} estimate for this tally, got {found}")]
    MethodMismatch { expected: Method, found: Method },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("all {0} replications were fully censored")]
    AllDegenerate(usize),
    #[error("parameter grid is empty")]
    EmptyGrid,
}
