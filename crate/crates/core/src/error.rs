use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An oracle received a non-finite argument.
    #[error("domain error: non-finite {0}")]
    Domain(&'static str),

    /// The oracle does not declare the capability needed for this query.
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    /// An estimator or iterate became non-finite.
    #[error("numerical failure: `{0}` is not finite")]
    NumericalFailure(&'static str),

    /// A trajectory statistic needs more recorded points.
    #[error("need at least two trajectory points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid problem instance: {0}")]
    Construction(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
