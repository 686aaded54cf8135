use std::path::PathBuf;

use crate::model::Rgb8;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("color {0} is not a palette color")]
    UnknownColor(Rgb8),

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("label source point cloud is empty")]
    EmptyCloud,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("window id sets differ: {0}")]
    IdMismatch(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{failed} of {total} windows failed")]
    BatchFailures { failed: usize, total: usize },

    #[error("window {id}: {source}")]
    Window {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with window and file context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Window { source, .. } | Error::File { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for malformed input or configuration, false for failures while running.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse(_)
                | Error::Validation(_)
                | Error::Config(_)
                | Error::UnknownFixture(_)
                | Error::EmptyMesh
                | Error::EmptyCloud
                | Error::DimensionMismatch(_)
                | Error::IdMismatch(_)
        )
    }
}
