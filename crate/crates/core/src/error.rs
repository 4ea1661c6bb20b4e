use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("normalization integral at reference node {index} underflowed to zero")]
    ReferenceUnderflow { index: usize },

    #[error("iteration did not converge at epsilon = {epsilon:e} after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        epsilon: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("bracket [{lo:e}, {hi:e}] gives lambda in [{lambda_lo:e}, {lambda_hi:e}], which does not contain {target:e}")]
    EmptyBracket {
        lo: f64,
        hi: f64,
        lambda_lo: f64,
        lambda_hi: f64,
        target: f64,
    },

    #[error("no converged rows in sweep")]
    EmptySweep,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be a positive finite number, got {value}")))
    }
}
