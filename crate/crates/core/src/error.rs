//! Crate-wide error type.
//!
//! Every fallible operation reports *what* failed and, where a number is
//! available, the measured residual, so callers can distinguish bad input
//! from resource limits and from genuine numerical trouble.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A structural invariant (orthogonality, unitarity, Hermiticity,
    /// block relations, ...) fails beyond tolerance.
    #[error("{what}: invariant residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    InvariantViolation {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    /// A request would exceed the configured memory budget.
    #[error("resource budget exceeded: {required} bytes required, {budget} allowed")]
    ResourceBudget { required: u128, budget: u128 },

    /// A truncated-space computation left too much weight at the cutoff.
    #[error("cutoff too small: top-level weight {leakage:.3e} exceeds {limit:.3e}")]
    CutoffTooSmall { leakage: f64, limit: f64 },

    /// A joint annihilator kernel is not one-dimensional.
    #[error("degenerate kernel of dimension {dim} (parity obstruction); expected 1")]
    DegenerateKernel { dim: usize },

    /// A matrix that must be inverted is numerically singular.
    #[error("{what} is numerically singular (condition estimate {condition:.3e})")]
    Singular { what: &'static str, condition: f64 },

    /// NaN or infinity showed up mid-computation.
    #[error("non-finite value encountered ({context}, step {step})")]
    NonFinite { context: &'static str, step: usize },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A structurally ill-posed series operation (e.g. division by a
    /// series with no constant term).
    #[error("structural error: {0}")]
    Structural(String),
}
