use thiserror::Error;

use crate::report::CertificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's domain: wrong shapes, non-Hermitian input, bad parameters.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("factorization failed to converge: {0}")]
    Factorization(String),

    /// Interior-point solver stopped without meeting its tolerances.
    #[error("SDP solver did not converge after {iterations} iterations (gap {gap:.3e}, primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})")]
    SolverFailure {
        iterations: usize,
        gap: f64,
        primal_residual: f64,
        dual_residual: f64,
    },

    /// A certification precondition failed; the report says which check.
    #[error("refused: {reason}")]
    Refusal {
        reason: String,
        report: Box<CertificationReport>,
    },

    /// A constructive extraction produced objects that do not reproduce the input.
    #[error("inconsistent result: {what} residual {residual:.3e} exceeds {tol:.3e}")]
    Inconsistency { what: String, residual: f64, tol: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
