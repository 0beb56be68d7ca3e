use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NbodyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid kernel variant: {0}")]
    InvalidVariant(String),

    #[error("variant expects {expected} layout but the system is {actual}")]
    LayoutMismatch {
        expected: crate::Layout,
        actual: crate::Layout,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

pub type Result<T, E = NbodyError> = std::result::Result<T, E>;

impl NbodyError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NbodyError::Io {
            path: path.into(),
            source,
        }
    }
}
