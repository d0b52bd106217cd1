use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("system is not asymptotically stable (spectral abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("Hankel singular values tie at r = {r} (relative gap {gap:e})")]
    SigmaTie { r: usize, gap: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),
}

/// Coarse failure classes, used by the command-line front end to pick an
/// exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Dimension(_) | Error::InvalidArgument(_) | Error::MissingData(_) => {
                ErrorClass::Usage
            }
            Error::Io { .. } | Error::Parse { .. } | Error::Schema(_) => ErrorClass::Io,
            Error::Singular(_)
            | Error::Unstable { .. }
            | Error::NoConvergence(_)
            | Error::RankDeficient(_)
            | Error::SigmaTie { .. }
            | Error::Decomposition(_) => ErrorClass::Numerical,
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Singular(_) => "singular",
            Error::Unstable { .. } => "unstable",
            Error::NoConvergence(_) => "no_convergence",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::RankDeficient(_) => "rank_deficient",
            Error::SigmaTie { .. } => "sigma_tie",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::MissingData(_) => "missing_data",
            Error::Decomposition(_) => "decomposition",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
