use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front ends to choose an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or invocation.
    Config,
    /// Input data could not be used.
    Data,
    /// Numerical or internal failure.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("declared column `{0}` not found in header")]
    MissingColumn(String),

    #[error("numeric column `{0}` has zero variance in the training rows")]
    ZeroVariance(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("non-finite log density at the initial point")]
    NonFiniteInit,

    #[error("need at least {needed} kept draws per chain, got {got}")]
    TooFewDraws { needed: usize, got: usize },

    #[error("degenerate beta fit: sample mean {mean}, sample variance {variance}")]
    DegenerateBeta { mean: f64, variance: f64 },

    #[error("degenerate logit-normal fit: mu {mu}, sigma {sigma}")]
    DegenerateLogitNormal { mu: f64, sigma: f64 },

    #[error("sample outside (0, 1): {0}")]
    SampleOutOfRange(f64),

    #[error("no family could be fitted (mean {mean}, variance {variance})")]
    AllFitsDegenerate { mean: f64, variance: f64 },

    #[error("test set has no {0} cases")]
    MissingClass(&'static str),

    #[error("unknown level `{level}` for attribute `{attribute}`")]
    UnknownLevel { attribute: String, level: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("case schema mismatch, offending fields: {0:?}")]
    SchemaMismatch(Vec<String>),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::UnknownVariable(_) => ErrorKind::Config,
            Error::Data(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::MissingColumn(_)
            | Error::ZeroVariance(_)
            | Error::TooFewRows { .. }
            | Error::MissingClass(_)
            | Error::UnknownLevel { .. }
            | Error::SchemaMismatch(_)
            | Error::DegenerateBeta { .. }
            | Error::DegenerateLogitNormal { .. }
            | Error::AllFitsDegenerate { .. }
            | Error::SampleOutOfRange(_) => ErrorKind::Data,
            Error::Json(_)
            | Error::DimensionMismatch { .. }
            | Error::NonFiniteInit
            | Error::TooFewDraws { .. }
            | Error::Invalid(_) => ErrorKind::Internal,
        }
    }
}
