use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// No token survived the minimum-count filter.
    EmptyVocab,
    /// A configuration value is outside its valid range.
    InvalidConfig(String),
    /// A vector has the wrong number of dimensions.
    DimensionMismatch { expected: usize, actual: usize },
    /// Cosine similarity is undefined for a zero vector.
    ZeroVector,
    /// The metric cannot be used with this kind of model or query.
    UnknownMetricForModel(String),
    /// No context token is both in the vocabulary and not a stopword.
    NoContextSignal,
    /// None of the label's tokens is in the vocabulary.
    LabelNotEmbeddable(String),
    /// A dataset record violates the sample invariants.
    Validation(String),
    /// Scoring was requested on zero samples.
    EmptyDataset,
    /// Prediction and gold lists disagree in length, or a prediction list
    /// exceeds the budget.
    LengthMismatch { expected: usize, actual: usize },
    /// A rank outside `1..=labels`.
    RankOutOfRange { rank: usize, labels: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyVocab => write!(f, "no token reaches the minimum count"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "expected {expected} dimensions, got {actual}")
            }
            Error::ZeroVector => write!(f, "cosine similarity of a zero vector"),
            Error::UnknownMetricForModel(msg) => write!(f, "unsupported metric: {msg}"),
            Error::NoContextSignal => {
                write!(f, "no in-vocabulary, non-stopword token in context")
            }
            Error::LabelNotEmbeddable(label) => {
                write!(f, "category label '{label}' has no in-vocabulary token")
            }
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::EmptyDataset => write!(f, "empty dataset"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::RankOutOfRange { rank, labels } => {
                write!(f, "rank {rank} outside 1..={labels}")
            }
        }
    }
}

impl core::error::Error for Error {}
