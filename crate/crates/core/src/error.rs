use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}line {line}: {message}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    /// An observed edge whose endpoints share no community, so no parameter
    /// setting can give it positive probability.
    #[error("infeasible instance: edge ({u}, {v}) is not covered by any shared community")]
    Infeasible { u: usize, v: usize },

    #[error("gradient undefined: edge ({u}, {v}) has zero total rate")]
    GradientUndefined { u: usize, v: usize },

    #[error(
        "background sampling over {nodes} nodes exceeds the guard of {guard} nodes; \
         pass an explicit override to proceed"
    )]
    CostGuard { nodes: usize, guard: usize },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attach a file path to a parse error that was produced from a bare stream.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(p.into()),
                line,
                message,
            },
            other => other,
        }
    }
}
