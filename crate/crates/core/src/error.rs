use std::path::PathBuf;

/// Errors produced anywhere in the collage pipeline.
#[derive(Debug, thiserror::Error)]
pub enum CollageError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{0}")]
    Format(String),
}

impl CollageError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CollageError::InvalidInput(msg.into())
    }
}

pub type Result<T, E = CollageError> = std::result::Result<T, E>;
