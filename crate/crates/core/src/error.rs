use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("lemma dictionary not found: {0}")]
    MissingLemmaResource(PathBuf),

    #[error("series for {0} is empty or too short")]
    EmptySeries(String),

    #[error("no window size in the grid keeps every partition at >= {min_nodes} nodes")]
    NoFeasibleWindow { min_nodes: usize },

    #[error("maximal clique count exceeded the budget of {0}")]
    CliqueBudgetExceeded(usize),

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("series too short: {len} observations, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("regression design matrix is rank deficient")]
    SingularRegression,

    #[error("book {book} is missing metrics: {missing:?}")]
    IncompleteBook { book: String, missing: Vec<String> },

    #[error("neighbor graph is disconnected ({} components)", components.len())]
    DisconnectedNeighborGraph { components: Vec<Vec<usize>> },

    #[error("class {class} has only {count} instance(s)")]
    TooFewInstances { class: String, count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
