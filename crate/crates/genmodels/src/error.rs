use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite loss in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error(transparent)]
    Nn(#[from] riga_nn::NnError),
    #[error(transparent)]
    Core(#[from] riga_core::CoreError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GenError>;
