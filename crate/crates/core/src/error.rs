use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the forecasting toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: field `{field}`: {message}")]
    MalformedRow {
        row: usize,
        field: String,
        message: String,
    },

    #[error("row {row}: duplicate id `{id}`")]
    DuplicateId { row: usize, id: String },

    #[error("row {row}: {invariant}")]
    Invariant { row: usize, invariant: String },

    #[error("project `{0}`: missing outturn (actual_cost absent)")]
    MissingOutturn(String),

    #[error("project `{0}`: missing traffic (estimated or actual traffic absent)")]
    MissingTraffic(String),

    #[error("total shortfall: inaccuracy {0}% leaves an unbounded overestimate")]
    TotalShortfall(f64),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("no time variation: all observations share one decision year")]
    NoTimeVariation,

    #[error("class too small: {count} matching observations, minimum is {min_size}")]
    ClassTooSmall { count: usize, min_size: usize },

    #[error("too few observations to bootstrap: {0} (need at least 5)")]
    TooFewToBootstrap(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero risk requires unbounded uplift beyond sample maximum")]
    ZeroRisk,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
