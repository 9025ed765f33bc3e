//! Error types shared across the crate.

/// Errors produced by parsing, normalization, and the pipeline itself.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A malformed record in an OBJ/OFF stream.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// No triangles survived loading and degenerate filtering.
    #[error("mesh contains no usable triangles")]
    EmptyMesh,

    /// All vertices coincide; the mesh cannot be scaled to the unit box.
    #[error("mesh has zero spatial extent")]
    ZeroExtent,

    /// The extracted surface violates an internal invariant. This indicates
    /// a bug in the extraction or repair passes, never bad user input.
    #[error("malformed surface: {0}")]
    MalformedSurface(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn parse_at(line: usize, message: impl Into<String>) -> Self {
        Self::parse(line, message)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
