use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("refusing to write outside the output directory: {0}")]
    OutsideOutput(String),
    #[error("incompatible manifests: {0}")]
    Incompatible(String),
    #[error("{phase}: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn phase<E: std::error::Error + Send + Sync + 'static>(phase: &'static str) -> impl FnOnce(E) -> CliError {
        move |e| CliError::Phase { phase, source: Box::new(e) }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
