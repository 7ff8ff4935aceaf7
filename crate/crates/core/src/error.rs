use thiserror::Error;

use crate::formulas::RegimeTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ray {0} is not part of the ray space")]
    UnknownRay(usize),

    #[error("value of `{0}` overflows double precision")]
    Overflow(&'static str),

    #[error("quadrature for `{name}` did not converge (error estimate {error_estimate:e})")]
    QuadratureDivergence {
        name: &'static str,
        error_estimate: f64,
    },

    #[error("estimator unreliable: effective sample size {ess:.1} below {threshold}")]
    Unreliable { ess: f64, threshold: f64 },

    #[error("sampler for {expected} cannot be used in regime {found}")]
    WrongRegime {
        expected: RegimeTag,
        found: RegimeTag,
    },

    #[error("functional horizon {horizon} is not a point of the simulation grid")]
    HorizonNotOnGrid { horizon: f64 },

    #[error("statistical test `{test}`: {reason}")]
    InvalidSample { test: &'static str, reason: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::invalid(
            name,
            format!("must be nonnegative, got {value}"),
        ));
    }
    Ok(())
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::invalid(
            name,
            format!("must be positive, got {value}"),
        ));
    }
    Ok(())
}
