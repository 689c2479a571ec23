use crate::ArithProgression;
use thiserror::Error;

/// Every failure a pipeline can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("negative input {0}")]
    NegativeInput(i128),
    #[error("element {0} exceeds the 2^62 cap")]
    OverflowRisk(i128),
    #[error("empty set")]
    EmptySet,
    #[error("set too small: need at least {need} elements, got {got}")]
    TooSmall { need: usize, got: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("query {z} outside [0, {max}]")]
    OutOfRange { z: i128, max: i128 },
    #[error("target {t} outside the decision region [{lo}, {hi}]")]
    OutOfRegion { t: i128, lo: i128, hi: i128 },
    #[error("gap {gap} needed {need} times but only {have} pairs carry it")]
    MultiplicityExceeded { gap: i64, need: u64, have: u64 },
    #[error("exhausted: {reason}")]
    Exhausted {
        reason: String,
        partial: Option<ArithProgression>,
    },
    #[error("{what} = {value} exceeds cap {cap}")]
    CapExceeded { what: &'static str, value: i128, cap: i128 },
    #[error("internal contract broken: {0}")]
    InternalContract(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::PreconditionViolated(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::InternalContract(msg.into())
}

pub(crate) fn exhausted(reason: impl Into<String>, partial: Option<ArithProgression>) -> Error {
    Error::Exhausted {
        reason: reason.into(),
        partial,
    }
}
