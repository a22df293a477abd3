use std::path::PathBuf;

/// Errors raised by the spectral toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resolution {resolution} on axis {axis} does not exceed the frequency width {width} (aliasing)")]
    Aliasing {
        axis: usize,
        resolution: usize,
        width: usize,
    },

    #[error("invalid resolution {0}: must be a power of two and at least 2")]
    InvalidResolution(usize),

    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol on axis {axis} is undefined at frequency {n}")]
    UndefinedSymbol { axis: usize, n: i64 },

    #[error("function vanishes on the grid (min |f| = {min:e}, max |f| = {max:e}); perturb it away from zero")]
    ZeroOnGrid { min: f64, max: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input, configuration or paths, as
    /// opposed to numerical breakdown or a failing output writer.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Csv(_))
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
