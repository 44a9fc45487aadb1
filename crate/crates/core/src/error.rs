use thiserror::Error;

/// Errors raised by the analytic evaluators, the correlation layer and the
/// Monte Carlo engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("gain distribution is degenerate (mu2 = {mu2}, mu1^2 = {mu1_sq}); moment matching needs positive variance")]
    DegenerateDistribution { mu1_sq: f64, mu2: f64 },

    #[error("no closed form for {0}")]
    NoClosedForm(String),

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error:e} (tolerance {tolerance:e})")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("failed to read matrix file {path}: {message}")]
    MatrixFile { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
