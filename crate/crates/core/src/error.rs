use thiserror::Error;

/// Errors raised by the numerical kernels and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} = {value} is outside the table range [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: i128,
        lo: u64,
        hi: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("lambda = {lambda} lies within {distance:e} of the Laplace eigenvalue {pole}")]
    PoleProximity {
        lambda: f64,
        pole: u64,
        distance: f64,
    },

    #[error("solver failed on gap ({left}, {right}): {reason}")]
    Solver {
        left: String,
        right: u64,
        reason: String,
    },

    #[error("truncation needs {needed} but the table only reaches {limit}")]
    WindowExceedsTable { needed: u64, limit: u64 },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PoleProximity { .. } | Error::Solver { .. } | Error::WindowExceedsTable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
