use thiserror::Error;

/// Errors produced by the pencil and GTRS routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input data violates a structural invariant (shape, symmetry, finiteness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A tolerance-dependent decision could not be made safely.
    ///
    /// `mu` names the pencil parameter under test when there is one and
    /// `margin` is the quantity that fell inside the ambiguity band.
    #[error("ambiguous verdict for {what}{} (margin {margin:e})", at_mu(mu))]
    Ambiguous {
        what: String,
        mu: Option<f64>,
        margin: f64,
    },

    /// An iterative numerical kernel failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iteration cap was hit before the convergence test passed.
    #[error("no convergence in {what} after {iterations} iterations (last bracket [{lo}, {hi}])")]
    Convergence {
        what: String,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    /// A routine was called outside of its documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

fn at_mu(mu: &Option<f64>) -> String {
    mu.map(|m| format!(" at mu = {m}")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;
