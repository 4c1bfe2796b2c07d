use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("label column holds {value:?} at line {line}; expected 0 or 1")]
    BadLabel { line: u64, value: String },

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("attack rows with no attack category: {rows:?}")]
    UnknownAttackType { rows: Vec<usize> },

    #[error("label/category mismatch at rows {rows:?}")]
    LabelCategoryMismatch { rows: Vec<usize> },

    #[error("unrecognized attack category {0:?}")]
    UnknownCategory(String),

    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero-variance column {0}; prune it before fitting")]
    ZeroVariance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid hyperparameter for {family}: {message}")]
    Hyperparameter { family: String, message: String },

    #[error("only one class present in {0}")]
    SingleClass(String),

    #[error("empty {0}")]
    Empty(String),

    #[error("non-finite loss in {0}")]
    NonFiniteLoss(String),

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grid trial {combo} failed: {source}")]
    Trial {
        combo: String,
        #[source]
        source: Box<Error>,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn hparam(family: impl ToString, msg: impl Into<String>) -> Self {
        Error::Hyperparameter {
            family: family.to_string(),
            message: msg.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad configuration rather than by the data or
    /// the environment. The CLI maps these to exit code 2.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Json(_)
            | Error::InvalidArgument(_)
            | Error::Hyperparameter { .. }
            | Error::UnknownCategory(_) => true,
            Error::Stage { source, .. } | Error::Trial { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
