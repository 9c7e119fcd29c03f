//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset construction, metric computation, calibrator
/// fitting, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A confidence or logit vector failed a structural invariant.
    #[error("invalid vector: {0}")]
    InvalidVector(String),

    /// A record is inconsistent with its dataset (class count, label range,
    /// feature dimensionality, or logit/confidence mismatch).
    #[error("invalid record `{id}`: {reason}")]
    InvalidRecord { id: String, reason: String },

    /// A binning scheme failed validation.
    #[error("invalid binning scheme: {0}")]
    InvalidScheme(String),

    /// The number of values handed to `bin_index` does not match the
    /// scheme's dimensionality.
    #[error("dimension mismatch: scheme has {expected} dims, got {got} values")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scheme dimension could not be resolved against the dataset's
    /// features.
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    /// An operation that needs at least one record was given none.
    #[error("empty dataset")]
    EmptyDataset,

    /// An operation needs more data than the dataset provides.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A record has no logits but the operation works on logits.
    #[error("record `{0}` has no logits")]
    MissingLogits(String),

    /// Every fit target has the same value, so the objective has no
    /// interior minimum.
    #[error("degenerate fit targets: {0}")]
    DegenerateTargets(String),

    /// A configuration value is out of range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The training loop produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    /// A detection file line could not be parsed or failed validation.
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    /// A file could not be opened or created. Carries the path so CLI
    /// messages can name it.
    #[error("cannot access `{path}`: {source}")]
    FileAccess { path: String, source: std::io::Error },

    /// A serialized report or calibrator is internally inconsistent.
    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
