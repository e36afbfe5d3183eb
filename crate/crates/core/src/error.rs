use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tie in round {round} between candidates {tied:?}")]
    Tie { round: usize, tied: Vec<usize> },

    #[error("no closed-form zone for this shape: {0}; use the numeric search")]
    UnsupportedRegime(String),

    #[error("no exclusion zone exists in (0, 1/2): {0}")]
    NoZone(String),

    #[error("cannot construct profile: {0}")]
    Unconstructible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_unit(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { value, domain: "[0, 1]" })
    }
}
