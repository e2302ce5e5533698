use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize },

    #[error("corpus contains no documents")]
    EmptyCorpus,

    #[error("corpus contains no tokens; rank-frequency table is empty")]
    EmptyTable,

    #[error("every document is empty; fractions are undefined")]
    AllDocumentsEmpty,

    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a value that cannot be ordered (NaN)")]
    UnorderableValue,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{requested} resampling iterations requested; at least {minimum} are required")]
    TooFewIterations { requested: usize, minimum: usize },

    #[error("reference distribution is not normalized (total mass {mass})")]
    NotNormalized { mass: f64 },

    #[error("log-likelihood is not finite at {parameter} = {value}")]
    NonFiniteLikelihood { parameter: &'static str, value: f64 },

    #[error("Heaps fit is underdetermined: {0}")]
    Underdetermined(String),

    #[error("context ({0}, {1}) was never observed in training")]
    UnseenContext(String, String),

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    ThreadPool(String),

    #[error("[{section}] {source}")]
    Section {
        section: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse grouping used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Section { source, .. } => source.kind(),
            Error::InvalidParameter(_) | Error::TooFewIterations { .. } | Error::ThreadPool(_) => ErrorKind::Usage,
            Error::NonFiniteLikelihood { .. } | Error::NotNormalized { .. } | Error::Underdetermined(_) => {
                ErrorKind::Numerical
            }
            Error::Io { .. }
            | Error::InvalidUtf8 { .. }
            | Error::EmptyCorpus
            | Error::EmptyTable
            | Error::AllDocumentsEmpty
            | Error::EmptySample
            | Error::UnorderableValue
            | Error::UnseenContext(..)
            | Error::MalformedModel(_)
            | Error::Json(_) => ErrorKind::Data,
        }
    }

    /// Tags an error with the report section that produced it.
    pub fn in_section(self, section: &'static str) -> Self {
        Error::Section {
            section,
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
