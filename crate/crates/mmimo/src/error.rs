/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Matrix or vector dimensions are inconsistent with the operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inputs are valid individually but the operating regime does not
    /// support the requested quantity (e.g. a bound that needs M >= K + 1).
    #[error("regime violation: {0}")]
    Regime(String),

    /// A Hermitian factorization found a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// Iterative solver exhausted its iteration budget.
    #[error("fixed point did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    /// A target value cannot be reached for any admissible input.
    #[error("target {target} unattainable (ceiling {ceiling})")]
    Unattainable { target: f64, ceiling: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
