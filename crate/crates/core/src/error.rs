use thiserror::Error;

/// Errors raised across the solver suite.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("instance size {n} outside supported range {min}..={max}")]
    SizeOutOfRange { n: usize, min: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("constraints force degree {degree} at vertex {vertex}")]
    DegreeViolation { vertex: usize, degree: usize },

    #[error("node budget of {budget} exhausted (best bound {best_bound})")]
    BudgetExhausted { budget: usize, best_bound: f64 },

    #[error("iteration limit reached (last bound {last_bound})")]
    IterationLimit { last_bound: f64 },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}
