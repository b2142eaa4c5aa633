use thiserror::Error;

/// Errors raised by the solvers and their supporting operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("non-finite iterate detected at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("invalid instance spec: {0}")]
    Spec(String),

    #[error("matrix text format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension {
        op,
        detail: detail.into(),
    }
}
