//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A quadrature, eigensolve or other numerical routine failed to produce
    /// a finite, converged answer.
    #[error("numerical failure in {op}: {detail}")]
    NumericalFailure { op: &'static str, detail: String },

    /// A model violated one of its own analytic contracts (e.g. tail fits at
    /// two abscissae disagree).
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    /// The caller combined arguments that cannot be used together.
    #[error("usage error: {0}")]
    Usage(String),

    /// A parameter left its admissible interval.
    #[error("{what} = {value} outside admissible range (|{what}| < {limit})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    /// A field configuration hit a pole of its closed form.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// The requested pair configuration does not exist for this model.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// The implicit stepper diverged; carries the last Newton residual norm.
    #[error("relaxation step failed at r = {r}: Newton residual {residual} after {iterations} iterations")]
    StepFailure {
        r: f64,
        residual: f64,
        iterations: usize,
    },

    /// A boundary-value formula divided by a vanishing kink derivative.
    #[error("singular boundary data: {0}")]
    SingularBoundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;
