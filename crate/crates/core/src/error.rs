use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("descriptor layout mismatch: expected {expected}, found {found}")]
    LayoutMismatch { expected: String, found: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("prediction failed: {0}")]
    Prediction(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("trial {trial_id}: quaternion norm {norm} is not 1")]
    NonUnitQuaternion { trial_id: String, norm: f64 },

    #[error("unknown schema version: {0}")]
    UnknownSchemaVersion(String),

    #[error("invalid record at line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("unmatched trial id: {0}")]
    UnmatchedTrial(String),

    #[error("unknown observer position: {0}")]
    UnknownPosition(String),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Short machine-readable class name, stable across releases.
    pub fn class(&self) -> &'static str {
        match self {
            Error::DegenerateGeometry(_) => "geometry",
            Error::InvalidParams(_) => "params",
            Error::LayoutMismatch { .. } => "layout",
            Error::Empty(_) => "empty",
            Error::InvalidWeights(_) => "weights",
            Error::SingularFit(_) => "singular-fit",
            Error::Prediction(_) => "prediction",
            Error::Io { .. } => "io",
            Error::MissingFile(_) => "missing-file",
            Error::MalformedRecord { .. } => "malformed-record",
            Error::NonUnitQuaternion { .. } => "non-unit-quaternion",
            Error::UnknownSchemaVersion(_) => "schema-version",
            Error::Validation { .. } => "validation",
            Error::Image { .. } => "image",
            Error::UnmatchedTrial(_) => "unmatched-trial",
            Error::UnknownPosition(_) => "unknown-position",
            Error::ModelFormat(_) => "model-format",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
