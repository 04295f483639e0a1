//! Error type shared by every stage of the pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("outside validity region: {0}")]
    Region(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("inconsistent reconstruction: {0}")]
    Inconsistency(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("boundary data: {0}")]
    BoundaryData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::BoundaryData(_) => 2,
            Error::Domain(_) | Error::Pole(_) | Error::Region(_) | Error::Grid(_) => 3,
            Error::Resolution(_)
            | Error::Divergence(_)
            | Error::Conditioning(_)
            | Error::Inconsistency(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
