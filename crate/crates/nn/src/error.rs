use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer {layer} ({kind}): {message}")]
    Shape { layer: usize, kind: &'static str, message: String },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Mismatch { expected: Vec<usize>, actual: Vec<usize> },
    #[error("non-finite loss for sample {index} of the batch")]
    NonFiniteLoss { index: usize },
    #[error("non-finite value produced by layer {layer}")]
    NonFinite { layer: usize },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;
