use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `s^2 + alpha1 s + alpha2` has a root with nonnegative real part.
    #[error("s^2 + {alpha1} s + {alpha2} is not Hurwitz: {condition}")]
    NotHurwitz {
        alpha1: f64,
        alpha2: f64,
        condition: &'static str,
    },

    #[error("derivative order {0} is not supported (expected 1 or 2)")]
    InvalidOrder(u32),

    #[error("differentiator state diverged at t = {time} s")]
    Divergence { time: f64 },

    #[error(
        "quadrature did not reach tolerance {requested:e}: achieved {achieved:e} (horizon {horizon} s)"
    )]
    Quadrature {
        requested: f64,
        achieved: f64,
        horizon: f64,
    },

    #[error("sweep at eps = {eps_gain}: {source}")]
    Sweep { eps_gain: f64, source: Box<Error> },

    #[error("settling window is empty")]
    EmptySettleWindow,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Rejects NaN/infinite values and values outside the allowed sign class.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}
