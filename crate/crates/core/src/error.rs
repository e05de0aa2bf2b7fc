use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("csv parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("label column must hold exactly two distinct values, found {0}")]
    NonBinaryLabel(usize),
    #[error("no complete rows remain")]
    NoCompleteRows,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("class {class} has {count} members, fewer than the {k} folds requested")]
    ClassTooSmall { class: u8, count: usize, k: usize },
    #[error("perplexity bisection did not converge for feature {feature}")]
    BisectionDiverged { feature: usize },
    #[error("non-finite t-SNE gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },
    #[error("grid too small for lossless mapping: {features} features on a {grid}x{grid} grid")]
    GridTooSmall { features: usize, grid: usize },
    #[error("feature {feature} value {value} outside [0, 1]; normalize first")]
    OutOfRange { feature: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
