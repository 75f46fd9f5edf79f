use heatdispatch_lp::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a pure operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Recomputed quantities disagree with the solver; points at a modelling bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("solver error: {0}")]
    Solver(#[from] LpError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 1,
            Error::Domain(_) | Error::Config(_) => 2,
            Error::Data(_) | Error::Io { .. } => 3,
            Error::Consistency(_) | Error::Solver(_) => 4,
        }
    }

    /// Prefixes the message with `context`, keeping the category.
    pub fn context(self, context: &str) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{context}: {m}")),
            Error::Config(m) => Error::Config(format!("{context}: {m}")),
            Error::Data(m) => Error::Data(format!("{context}: {m}")),
            Error::Infeasible(m) => Error::Infeasible(format!("{context}: {m}")),
            Error::Consistency(m) => Error::Consistency(format!("{context}: {m}")),
            other => other,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
