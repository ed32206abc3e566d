use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DroError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("scenario distance from the empty scenario needs an anchor element")]
    AnchorMissing,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("enumeration too large: {what} = {size} exceeds guard {guard}")]
    EnumerationTooLarge {
        what: &'static str,
        size: usize,
        guard: usize,
    },
    #[error("oracle contract violated: {0}")]
    OracleContractViolation(String),
    #[error("empty threshold grid: all scenario distances are zero")]
    EmptyGrid,
    #[error("rounding guarantee violated: {0}")]
    RoundingGuaranteeViolated(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, DroError>;
