use thiserror::Error;

/// Errors raised by the numerical kernels and the exploration engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("{what} did not converge (last error estimate {estimate:.3e})")]
    Convergence { what: String, estimate: f64 },

    #[error("tensor too large to densify: {0} elements")]
    Size(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid component {component}: {msg}")]
    Validation { component: usize, msg: String },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
