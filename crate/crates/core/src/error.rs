use std::fmt;

/// Errors surfaced by constructors, cost evaluation and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// Two geometric objects with different dimensions were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// The operation is not defined for the requested loss.
    Unsupported(String),
    /// An enumeration would exceed the configured work budget.
    BudgetExceeded { required: u128, budget: u128 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::BudgetExceeded { required, budget } => write!(
                f,
                "enumeration budget exceeded: {required} assignments required, budget is {budget}"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
