//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GbsvmError>;

#[derive(Debug, Error)]
pub enum GbsvmError {
    #[error("csv format error at row {row}, column {column}: {message}")]
    CsvFormat {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("label column has {0} distinct values; a binary problem needs exactly 2")]
    LabelCardinality(usize),

    #[error("positive label {0:?} does not occur in the label column")]
    MissingPositiveLabel(String),

    #[error("dataset needs at least {needed} rows, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("class {label} has {count} samples; stratified splitting needs at least 2 per class")]
    Stratification { label: i8, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("single-class input: the balance constraint forces all multipliers to zero")]
    SingleClass,

    #[error("need at least 2 granular balls to train, found {0}")]
    InsufficientBalls(usize),

    #[error(
        "degenerate dual solution: |weighted center sum| = {norm_a:.3e} \
         leaves the weight direction undefined"
    )]
    DegenerateSolution { norm_a: f64 },

    #[error("no support balls: every multiplier is below the support threshold")]
    NoSupportBalls,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
