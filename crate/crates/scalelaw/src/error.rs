//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A data row failed to parse; names the line and field.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    /// Two records share the same (arch, dataset, samples, task) key.
    #[error("duplicate record key `{key}` (rows {first} and {second})")]
    DuplicateRecord {
        key: String,
        first: usize,
        second: usize,
    },

    /// An architecture name was not found in the registry.
    #[error("unknown architecture `{0}`")]
    UnknownArch(String),

    /// Two registry entries share a name.
    #[error("duplicate architecture `{0}` in registry")]
    DuplicateArch(String),

    /// A required task is absent (or repeated) in an aggregation set.
    #[error("task `{task}` {problem} in aggregation set")]
    TaskAggregation { task: String, problem: String },

    /// A value fell outside its admissible range.
    #[error("value out of range: {0}")]
    Range(String),

    /// Not enough distinct data to fit.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix/vector dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A worker layout does not divide the batch.
    #[error("invalid shard layout: {0}")]
    Layout(String),

    /// A computation produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The throughput baseline is missing from the sample set.
    #[error("missing baseline: no sample with n_gpus = {0}")]
    MissingBaseline(u32),

    /// Optimizer produced a non-finite loss for a sweep member.
    #[error("training diverged (non-finite loss) at lr={lr}, epochs={epochs}")]
    Diverged { lr: f64, epochs: usize },

    /// Invalid image raster or hash input.
    #[error("invalid image: {0}")]
    Image(String),

    /// Malformed configuration or CLI input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
