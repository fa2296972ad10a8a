//! Shared error type. Every fallible path in the crate reports through
//! [`Error`]; the CLI maps variants onto process exit codes (1 usage,
//! 2 numerical failure, 3 I/O).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible with the requested operation.
    #[error("{op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// Invalid argument, configuration value, or CLI usage.
    #[error("invalid argument: {0}")]
    InvalidArg(String),

    /// Config file could not be parsed or contains unknown keys.
    #[error("config: {0}")]
    Config(String),

    /// Requested spectral mode count exceeds what the grid resolves.
    #[error("mode count {modes} exceeds the {available} modes resolvable at resolution {resolution}")]
    ModeOverflow {
        modes: usize,
        available: usize,
        resolution: usize,
    },

    /// A fixed-width model was fed input at a resolution it was not built
    /// for; retraining is required to change the input resolution.
    #[error("input resolution {got} does not match the locked resolution {expected}; retraining required")]
    ResolutionMismatch { expected: usize, got: usize },

    /// A forward or backward pass produced a non-finite value.
    #[error("non-finite value produced by {context}")]
    NonFinite { context: String },

    /// Backward pass was started from a non-scalar node.
    #[error("backward requires a scalar loss, got {len} elements")]
    NonScalarLoss { len: usize },

    /// An iterative or direct numerical procedure failed.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },

    /// Training aborted on a non-finite loss.
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },

    #[error("empty split partition: {0}")]
    EmptySplit(String),

    /// File contents violate a documented binary or CSV layout.
    #[error("format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape { .. }
            | Error::InvalidArg(_)
            | Error::Config(_)
            | Error::ModeOverflow { .. }
            | Error::ResolutionMismatch { .. }
            | Error::EmptySplit(_) => 1,
            Error::NonFinite { .. }
            | Error::NonScalarLoss { .. }
            | Error::Numerical { .. }
            | Error::NanLoss { .. } => 2,
            Error::Format(_) | Error::Io(_) => 3,
        }
    }
}
