use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("radius {r} outside the field grid [{lo}, {hi}]")]
    OutOfGrid { r: f64, lo: f64, hi: f64 },
    #[error("integration failed at r = {r}: {reason}")]
    Integration { r: f64, reason: &'static str },
    #[error("no shooting bracket: b = {lo} and b = {hi} give the same event class")]
    BracketNotFound { lo: f64, hi: f64 },
    #[error("test profile is not supported inside the grid")]
    SupportViolation,
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("Newton iteration diverged at lambda = {lambda} (residual {residual})")]
    NewtonDiverged { lambda: f64, residual: f64 },
    #[error("continuation stalled after {points} points at lambda = {lambda}")]
    ContinuationStall { points: usize, lambda: f64 },
    #[error("singular linear system")]
    Singular,
}

pub type Result<T> = core::result::Result<T, Error>;
