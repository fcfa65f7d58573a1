use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} is {actual}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A config, graph or trajectory file could not be read or parsed.
    #[error("{path}: {source}")]
    Input { path: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn input(path: &std::path::Path, source: Error) -> Self {
        Error::Input {
            path: path.display().to_string(),
            source: Box::new(source),
        }
    }

    /// Process exit status: 3 for a tripped resource guard, 2 for bad input
    /// or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceLimit { .. } => 3,
            Error::Input { source, .. } => match **source {
                Error::ResourceLimit { .. } => 3,
                _ => 2,
            },
            Error::InvalidArgument(_) | Error::Domain(_) | Error::Parse { .. } | Error::Json(_) => 2,
            Error::Io(_) => 1,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
