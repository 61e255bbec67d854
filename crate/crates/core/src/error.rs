use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure to turn text into a [`ScalarExpr`](crate::ScalarExpr).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("coordinate `{name}` out of range (declared {declared})")]
    CoordinateOutOfRange { name: String, declared: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    DivisionByZero,
    NonFinite,
}

impl core::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "log of non-positive value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NonFinite => "non-finite value",
        })
    }
}

/// Evaluation left the domain of a partial operation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}` (argument {value})")]
pub struct DomainError {
    pub kind: DomainKind,
    pub subexpr: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(
        "metric is not positive definite: smallest pivot {min_pivot:e}, largest {max_pivot:e}"
    )]
    SingularMetric { min_pivot: f64, max_pivot: f64 },
    #[error("jet order {requested} unavailable (maximum {max})")]
    OrderUnavailable { requested: usize, max: usize },
    #[error(
        "not a sum of single-factor functions: max |d1d2 f| = {mixed:e} exceeds {tolerance:e}"
    )]
    NotDecomposable { mixed: f64, tolerance: f64 },
    #[error("precondition `{check}` violated: {value:e} exceeds tolerance {tolerance:e}")]
    Precondition {
        check: &'static str,
        value: f64,
        tolerance: f64,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("numerical abort: {0}")]
    NonFinite(String),
}
