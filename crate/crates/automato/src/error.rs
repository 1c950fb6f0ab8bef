use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was outside its valid range (e.g. `k >= n`, `delta <= 0`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The DTM density is undefined because the mean squared distance to the
    /// k nearest neighbors is exactly zero.
    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    /// Two vectors (labels, densities, filter values, ...) disagree in length.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// A data, label, or model file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Wrapped I/O failure with the offending path.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A clustering step invoked from Mapper failed on one preimage.
    #[error("clusterer failed on interval {interval}: {source}")]
    MapperClusterer {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    /// The bootstrap could not produce a valid resample after repeated retries.
    #[error("bootstrap iteration {iteration} failed after {attempts} attempts: {last}")]
    BootstrapRetriesExhausted {
        iteration: usize,
        attempts: usize,
        last: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
