use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The thresholded support came out empty.
    #[error("no usable band: no bin exceeds threshold {threshold:.6e}")]
    NoUsableBand { threshold: f64 },

    /// The projection matrix is (numerically) rank deficient.
    #[error("ill-conditioned least-squares system (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    /// The objective returned NaN/inf or a negative value during a GA run.
    #[error("objective returned {value} at parameters {params:?}")]
    InvalidObjective { value: f64, params: Vec<f64> },

    /// More paths were requested than there are usable bins.
    #[error("{paths} paths requested but the support only has {bins} bins")]
    TooManyPaths { paths: usize, bins: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
