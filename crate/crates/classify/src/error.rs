use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("both classes must be present")]
    SingleClass,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<ClassifyError>,
    },
    #[error("non-finite loss in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error(transparent)]
    Core(#[from] riga_core::CoreError),
    #[error(transparent)]
    Nn(#[from] riga_nn::NnError),
    #[error(transparent)]
    Gen(#[from] riga_genmodels::GenError),
}

impl ClassifyError {
    pub fn in_fold(self, fold: usize) -> Self {
        match self {
            e @ ClassifyError::Fold { .. } => e,
            e => ClassifyError::Fold { fold, source: Box::new(e) },
        }
    }
}

pub type Result<T> = std::result::Result<T, ClassifyError>;
