use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("({u}, {v}) is not an edge of the graph")]
    NotAnEdge { u: usize, v: usize },

    #[error("configuration is all-cooperate; no active edge remains")]
    Absorbed,

    #[error("graph has {nodes} nodes, exhaustive enumeration is limited to {limit}")]
    SizeLimit { nodes: usize, limit: usize },

    #[error("random regular graph generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bound not applicable: {0}")]
    BoundInapplicable(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("output directory {} already exists", .0.display())]
    OutputCollision(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than by
    /// the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Config(_)
                | Error::UnknownExperiment(_)
                | Error::Json(_)
                | Error::Parse(_)
                | Error::SizeLimit { .. }
                | Error::Domain(_)
                | Error::BoundInapplicable(_)
        )
    }
}
