use std::io;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const IO: i32 = 5;
    pub const NOT_CONVERGED: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] agm_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },

    /// An observed edge, in input labels, that no shared community covers.
    #[error("infeasible instance: edge ({u}, {v}) is not covered by any shared community; rerun with --fit-epsilon to fit a background probability")]
    Uncovered { u: i64, v: i64 },

    /// The fit report was written but the optimizer stopped early.
    #[error("fit did not converge after {iterations} iterations (projected gradient norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        CliError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use agm_core::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::CostGuard { .. } => exit::USAGE,
                E::Parse { .. } => exit::PARSE,
                E::Infeasible { .. } | E::GradientUndefined { .. } => exit::INFEASIBLE,
                E::Io(_) => exit::IO,
            },
            CliError::Io { .. } => exit::IO,
            CliError::Uncovered { .. } => exit::INFEASIBLE,
            CliError::NotConverged { .. } => exit::NOT_CONVERGED,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }
}
