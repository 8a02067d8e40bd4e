use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {0} lies on a branch cut and no side was given")]
    BranchCut(String),

    #[error("quadrature did not reach tolerance (achieved {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("root finder did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NonConvergence { iterations: usize, worst_residual: f64 },

    #[error("no sign change found while bracketing: {0}")]
    Bracket(String),

    #[error("contour failed to close after {steps} steps")]
    Closure { steps: usize },

    #[error("contour step collapsed to {step:e} at {at}")]
    StepCollapse { step: f64, at: String },

    #[error("point {0} lies on the contour")]
    OnBoundary(String),

    #[error("parameter plan error: {0}")]
    Plan(String),

    #[error("asymptotic formula used outside its window: {0}")]
    AsymptoticDomain(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
