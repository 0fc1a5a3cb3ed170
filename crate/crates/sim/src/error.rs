use chairsearch_core::session::SessionError;
use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] chairsearch_core::Error),

    #[error("session: {0}")]
    Session(#[from] SessionError),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("unknown target chair {0}")]
    UnknownTarget(u32),

    #[error("no silhouette strokes for shape {0}")]
    EmptySilhouette(u32),

    #[error("statistics: {0}")]
    Stats(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<toml::de::Error> for SimError {
    fn from(e: toml::de::Error) -> Self {
        SimError::Config(e.to_string())
    }
}
