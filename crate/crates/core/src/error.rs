use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ego `{0}` not found in graph")]
    EgoNotFound(String),

    #[error("malformed record {record}: {reason}")]
    MalformedRecord { record: u64, reason: String },

    #[error("ego `{ego_id}` skipped: degree {degree} is below 2")]
    DegenerateEgo { ego_id: String, degree: usize },

    #[error("silhouette is undefined for a single cluster")]
    SilhouetteUndefinedForK1,

    #[error("empty population: no clustering results to summarize")]
    EmptyPopulation,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid graph snapshot: {0}")]
    Snapshot(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    ///
    /// 1 = usage/config, 2 = data, 3 = internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io {
            path: PathBuf::new(),
            source,
        }
    }
}
