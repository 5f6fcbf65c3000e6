use thiserror::Error;

/// Errors raised by the lab's operators.
///
/// Numerical outcomes such as a Picard run that does not converge or a disc
/// that leaves the target domain are data, not errors; they are reported in
/// the corresponding result types.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mask has no node with a full stencil")]
    MaskTooThin,

    #[error("empty mask")]
    EmptyMask,

    #[error("field vanishes at node ({i}, {j})")]
    VanishingField { i: usize, j: usize },

    #[error("phase unwrap inconsistent by {discrepancy:.3e} rad at node ({i}, {j})")]
    UnwrapInconsistent { i: usize, j: usize, discrepancy: f64 },

    #[error("point outside the domain D_2 x D_(1/10): {0}")]
    OutsideDomain(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no node satisfies the check's eligibility conditions")]
    NoEligibleNodes,

    #[error("not an instance of the check: {0}")]
    GateFailure(String),

    #[error("power series is not invertible: linear coefficient is zero")]
    NotInvertible,

    #[error("decode error: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
