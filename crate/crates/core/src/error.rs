use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("state left the domain at t={t}")]
    DomainEscape {
        t: f64,
        /// Samples integrated up to (and including) the escaping step.
        partial: Box<Trajectory>,
    },

    #[error("non-finite state encountered at t={t}")]
    NonFinite { t: f64 },

    #[error("insufficient data: need at least {needed} usable samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(
        "factorization g(t, p(x), x) != f(t, x): worst residual {residual:e} at x={witness:?}"
    )]
    FactorizationMismatch { residual: f64, witness: Vec<f64> },

    #[error("horizontal frame is degenerate (H^T H singular) at t={t}")]
    DegenerateFrame { t: f64 },

    #[error("model `{model}` lacks required structure: {what}")]
    MissingStructure { model: String, what: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subspace is not flow-invariant: |H^T A Q| = {residual:e}")]
    NotFlowInvariant { residual: f64 },

    #[error("{0}")]
    Config(String),
}
