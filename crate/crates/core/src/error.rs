use std::path::PathBuf;

use crate::infer::soap::{SoapSection, SoapSummary};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("transcript {0:?} has no usable text")]
    EmptyTranscript(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("embedding provider failed: {0}")]
    Provider(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported index format version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("model returned an empty response")]
    EmptyResponse,

    #[error("SOAP summary is missing sections: {}", format_sections(missing))]
    PartialSoap {
        missing: Vec<SoapSection>,
        partial: Box<SoapSummary>,
    },

    #[error("agreement statistic is undefined: {0}")]
    DegenerateAgreement(String),

    #[error("unknown item {0:?}")]
    Key(String),
}

fn format_sections(sections: &[SoapSection]) -> String {
    sections
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
