//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by dataset handling, model fitting, and evaluation.
#[derive(Error, Debug)]
pub enum CoreError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line: {msg}")]
    MalformedLine {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("check-in references unknown POI `{poi}` ({path}:{line})")]
    UnknownPoi {
        poi: String,
        path: String,
        line: usize,
    },
    #[error("coordinate out of range for POI `{poi}`: lat={lat}, lon={lon}")]
    CoordinateOutOfRange { poi: String, lat: f64, lon: f64 },
    #[error("POI `{poi}` {state} a category while the dataset-level flag says the opposite")]
    MixedCategoryPresence { poi: String, state: String },
    #[error("unknown user index {0}")]
    UnknownUser(u32),
    #[error("unknown POI index {0}")]
    UnknownPoiIndex(u32),
    #[error("categorical context unavailable: dataset has no POI categories")]
    CategoricalUnavailable,
    #[error("empty history: temporal score needs at least one past check-in")]
    EmptyHistory,
    #[error("empty frequency matrix: nothing to train on")]
    EmptyMatrix,
    #[error("objective became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("latent dimension mismatch: model K={expected}, init K={actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("missing context score for {0}")]
    MissingContext(String),
    #[error("exploration factor undefined for a user with zero check-ins")]
    NoCheckins,
    #[error("Pearson correlation undefined: {0} vector is constant")]
    ConstantVector(String),
    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        needed: usize,
        got: usize,
        what: String,
    },
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
