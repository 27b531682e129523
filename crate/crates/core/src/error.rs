use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid scalar `{0}`")]
    BadScalar(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("normalization violated: φ(1) = {0}, expected 1")]
    Normalization(String),

    #[error("missing moment for multi-index {0:?}")]
    MissingMoment(Vec<u32>),

    #[error("needs moments up to degree {needed}, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid sample weights: {0}")]
    Weights(String),

    #[error(
        "moment functional is not positive: monomial Gram matrix of degree {level} is not PSD"
    )]
    NotPositive { level: usize },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("Favard condition `{condition}` fails at level {level}")]
    FavardViolation {
        condition: &'static str,
        level: usize,
    },

    #[error(
        "inconsistent adjoint: no annihilator A^-_{{{coordinate}|{level}}} satisfies the adjoint relation (kernel of level {} does not lift)",
        level - 1
    )]
    InconsistentAdjoint { level: usize, coordinate: usize },

    #[error("word of length {len} exceeds the {max} supported by the built levels")]
    WordTooLong { len: usize, max: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
