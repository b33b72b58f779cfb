use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Broad failure classes; the CLI maps these onto its exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A resource file is missing, unreadable or malformed.
    Resource,
    /// Training or evaluation data is unusable.
    Data,
    /// Predictions and gold annotations do not line up.
    Alignment,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("unreadable input files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    UnreadableInputs(Vec<PathBuf>),

    #[error("{file} line {line}: {message}")]
    Syntax {
        file: String,
        line: usize,
        message: String,
    },

    #[error("duplicate pattern id `{0}`")]
    DuplicatePattern(String),

    #[error("marker index {index} out of range for a sentence of {len} tokens")]
    MarkerOutOfRange { index: usize, len: usize },

    #[error("training data needs at least one YES and one NO example")]
    SingleLabel,

    #[error("training data mixes feature kinds or widths")]
    MixedFeatures,

    #[error("non-finite log-likelihood at iteration {0}")]
    NonFinite(usize),

    #[error("model was trained on {expected} features but got {got}")]
    FeatureMismatch { expected: String, got: String },

    #[error("empty test set")]
    EmptyTestSet,

    #[error("empty gold slot")]
    EmptyGold,

    #[error("unaligned sentence references: {}", .0.join(", "))]
    Unaligned(Vec<String>),

    #[error("model file: {0}")]
    Model(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn syntax(file: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. }
            | Error::UnreadableInputs(_)
            | Error::Syntax { .. }
            | Error::DuplicatePattern(_)
            | Error::Model(_)
            | Error::Config(_)
            | Error::FeatureMismatch { .. } => ErrorClass::Resource,
            Error::Unaligned(_) => ErrorClass::Alignment,
            Error::MarkerOutOfRange { .. }
            | Error::SingleLabel
            | Error::MixedFeatures
            | Error::NonFinite(_)
            | Error::EmptyTestSet
            | Error::EmptyGold
            | Error::Json { .. } => ErrorClass::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
