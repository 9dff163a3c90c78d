use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file.
    #[error("ParseError: {path}: {message}")]
    Parse { path: String, message: String },

    /// Well-formed input that violates an embedding-set invariant.
    #[error("ValidationError: {0}")]
    Validation(String),

    #[error("DimensionError: {0}")]
    Dimension(String),

    /// Cosine distance against a vector with zero norm.
    #[error("ZeroVectorError: cosine distance is undefined for sample {0} (zero norm)")]
    ZeroVector(usize),

    #[error("SingleClassError: {0}")]
    SingleClass(String),

    #[error("SpecError: {0}")]
    Spec(String),

    #[error("VocabularyMismatchError: {0}")]
    VocabularyMismatch(String),

    #[error("UnknownClassError: no class named {0:?}")]
    UnknownClass(String),

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    /// True for input that was read but violates a data invariant.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::SingleClass(_) | Error::Dimension(_)
        )
    }
}
