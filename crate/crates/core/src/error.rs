use std::io;

use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested limit law does not exist in the current dependence regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// A numerical routine failed to reach its accuracy target.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The circulant embedding of the covariance is not nonnegative definite.
    #[error("circulant embedding has a negative eigenvalue {min_eigenvalue:e} (size {size})")]
    Embedding { min_eigenvalue: f64, size: usize },

    /// A truncated series could not be bounded below the requested tolerance.
    #[error("series truncation bound {bound:e} exceeds tolerance {tol:e}")]
    Truncation { bound: f64, tol: f64 },

    /// No nonzero Hermite coefficient was found up to the maximal degree.
    #[error("no Hermite coefficient above {tol:e} up to total degree {max_degree}")]
    RankUndetected { max_degree: usize, tol: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code used by the command-line front end.
    ///
    /// File and parse failures map to 1, domain errors to 2, regime errors to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_) => 1,
            Error::Regime(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
