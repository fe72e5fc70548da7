use thiserror::Error;

/// Errors raised across the toolbox.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates the constraints of its family or module.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point lies outside the (interior of the) domain an operation needs.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sign change found while bracketing a root: {0}")]
    NoSignChange(String),

    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),

    /// A certified bracket for an implicit prox/Cramér equation could not be built.
    #[error("root failure: {0}")]
    RootFailure(String),

    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),

    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step size violation: {0}")]
    StepSize(String),

    /// Oracle could not find a sign change of the conjugate's derivative.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// Malformed text input (vectors, matrices, configs).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn reject_nan(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| x.is_nan()) {
        Err(Error::Domain("NaN input".into()))
    } else {
        Ok(())
    }
}
