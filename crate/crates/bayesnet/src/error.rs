use thiserror::Error;

#[derive(Debug, Error)]
pub enum BnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph would contain a cycle")]
    Cycle,
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("value {value} in column {column} exceeds cardinality {card}")]
    ValueOutOfRange { column: usize, value: usize, card: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BnError>;
