use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: String, v: String },

    #[error("line {line}: sign token {token:?} is not in the sign mapping")]
    InvalidSign { line: usize, token: String },

    #[error("split ratios must be non-negative and sum to 1 (got {0:?})")]
    InvalidRatios([f64; 3]),

    #[error("{op}: shape mismatch, expected {expected} but found {found}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("{solver} did not converge after {iterations} iterations (worst residual {residual:.3e}, tolerance {tol:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("matrix of size {size} exceeds the dense ceiling of {ceiling}")]
    CeilingExceeded { size: usize, ceiling: usize },

    #[error("non-finite value in layer {layer}, branch {branch}")]
    NonFinite { layer: usize, branch: &'static str },

    #[error("training diverged at epoch {epoch} (last finite loss {last_loss:.6})")]
    Diverged { epoch: usize, last_loss: f64 },

    #[error("AUC is undefined when only one sign class is present")]
    SingleClass,

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by the command-line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::InvalidRatios(_) => ErrorKind::Usage,
            Error::Parse { .. }
            | Error::DuplicateEdge { .. }
            | Error::InvalidSign { .. }
            | Error::IndexOutOfRange(_)
            | Error::ShapeMismatch { .. }
            | Error::Format { .. }
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Data,
            Error::NonConvergence { .. }
            | Error::CeilingExceeded { .. }
            | Error::NonFinite { .. }
            | Error::Diverged { .. }
            | Error::SingleClass => ErrorKind::Numerical,
        }
    }

    pub(crate) fn shape(op: &'static str, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
