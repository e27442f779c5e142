//! Error type shared by the exact-formula modules.

use thiserror::Error;

/// Errors from factorizations, kernel evaluation and quadrature.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A norm `f_p(λλ̄)` vanished, so the LDU factorization of the moment
    /// matrix (and everything downstream of it) is undefined at this
    /// condition point.
    #[error("degenerate condition point: |f_{p}| = {modulus:e} underflowed to zero")]
    DegenerateCondition { p: usize, modulus: f64 },

    /// A pivot of the numeric tridiagonal LDU dropped below the breakdown
    /// threshold.
    #[error("pivot breakdown in tridiagonal LDU at index {index}: |d| = {modulus:e}")]
    PivotBreakdown { index: usize, modulus: f64 },

    /// A point-list argument had the wrong length for the requested operation.
    #[error("{op}: got {got} points, need {need}")]
    ArgumentCount {
        op: &'static str,
        got: usize,
        need: &'static str,
    },

    /// Doubling the quadrature nodes still moved the result by more than the
    /// requested tolerance.
    #[error("quadrature did not converge: last refinement changed result by {delta:e} (tol {tol:e})")]
    QuadratureNonConvergence { delta: f64, tol: f64 },

    /// Two points that must be distinct coincide (within 1e-8).
    #[error("coincident points: |λ_{m} − λ_1| = {separation:e}")]
    CoincidentPoint { m: usize, separation: f64 },

    /// Scaled arithmetic cannot represent the requested size.
    #[error("scaled arithmetic exhausted: {context}")]
    Overflow { context: String },

    /// A precondition on an input value was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
