use thiserror::Error;

/// Errors produced by the renderer and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violated a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Two inputs that must agree in size did not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A file was readable but its contents were malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image codec: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// True for failures caused by reading or decoding files rather than by
    /// bad parameters.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Image(_) | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
