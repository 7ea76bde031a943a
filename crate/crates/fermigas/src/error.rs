//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FermigasError>;

#[derive(Debug, Error)]
pub enum FermigasError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("potential failed validation: {0}")]
    InvalidPotential(String),

    #[error("solver did not reach tolerance {requested:e}; achieved residual {achieved:e}")]
    SolverTolerance { requested: f64, achieved: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("matrix is numerically singular (condition estimate {cond:e} exceeds {limit:e})")]
    SingularMatrix { cond: f64, limit: f64 },

    #[error("points violate the required separation: {0}")]
    SeparationViolation(String),

    #[error("schedule infeasible: {0}")]
    InfeasibleSchedule(String),

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
