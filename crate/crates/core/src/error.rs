use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("rank-deficient design: Gram condition number {condition:.3e} exceeds {limit:.3e}")]
    RankDeficient { condition: f64, limit: f64 },

    #[error("outside the formula's validity range: {0}")]
    OutOfRegime(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no qualifier won all of its home matches")]
    NoChampion,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
