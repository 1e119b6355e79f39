use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch in {op}: expected {expected}, found {found}")]
    Shape { op: &'static str, expected: String, found: String },

    #[error("matrix is numerically singular (smallest singular value {smallest:e}, threshold {threshold:e})")]
    Singular { smallest: f64, threshold: f64 },

    #[error("invariant violated: {what} (residual {residual:e})")]
    InvariantViolation { what: String, residual: f64 },

    #[error("involution has virtual dimension {0}, expected 0")]
    VirtualDimension(i64),

    #[error("frames span different planes (residual {residual:e})")]
    NotSameFiber { residual: f64 },

    #[error("finite differences did not converge: {what} (disagreement {disagreement:e})")]
    NumericalInstability { what: String, disagreement: f64 },

    #[error("declared polynomial degree {degree} is too small (held-out residual {residual:e})")]
    DegreeMisdeclared { degree: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape_err(op: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::Shape { op, expected: expected.to_string(), found: found.to_string() }
}
