use crate::jets::JetError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinslerError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid parameters for {metric}: {reason}")]
    InvalidParams { metric: String, reason: String },
    #[error("point outside the domain of {metric}: {reason}")]
    Domain { metric: String, reason: String },
    #[error("{0} has neither a primal nor a dual evaluator")]
    MissingEvaluator(String),
    #[error("{0} has no volume density")]
    MissingDensity(String),
    #[error("{what} is singular or indefinite")]
    Singular { what: String },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("critical point of the scalar field (|df| = {0:e})")]
    CriticalPoint(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("vector parallel to the reference direction")]
    Degenerate,
    #[error("integration stopped at s = {s}: {reason}")]
    Integration { s: f64, reason: String },
    #[error("pole of {what} at {at}")]
    Pole { what: String, at: f64 },
    #[error("sampler failed: {0}")]
    Sampler(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("normal derivative not tangent: {0}")]
    Tangency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FinslerError>;

impl FinslerError {
    pub fn domain(metric: &str, reason: impl Into<String>) -> Self {
        FinslerError::Domain {
            metric: metric.to_string(),
            reason: reason.into(),
        }
    }
}
