use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid quantum numbers: {0}")]
    QuantumNumbers(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("spin count {n} outside supported range {min}..={max}")]
    SpinCountOutOfRange { n: usize, min: usize, max: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("step size {step} exceeds limit {limit}")]
    StepSize { step: f64, limit: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
