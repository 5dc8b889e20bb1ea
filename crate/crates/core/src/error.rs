use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an out-of-range id, interval or parameter.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("corrupt round record at t={t}: {reason}")]
    CorruptRecord { t: u64, reason: String },

    /// The scheduler was asked for a block distribution it does not hold.
    #[error("invalid state: {0}")]
    State(String),

    #[error(
        "solver failed after {iterations} oracle calls: policy {policy} violates the variance \
         constraint by {violation:.3e}"
    )]
    SolverFailure {
        iterations: usize,
        policy: usize,
        violation: f64,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("config error in {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("invariant breach at t={t}: {message}\n{dump}")]
    InvariantBreach { t: u64, message: String, dump: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 1 for configuration/input problems,
    /// 2 for runtime invariant breaches and solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvariantBreach { .. } | Error::SolverFailure { .. } | Error::State(_) => 2,
            _ => 1,
        }
    }
}
