use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain where the operation is defined.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Input parameters fall in an asymptotic regime the operation does not cover.
    #[error("unsupported regime: {0}")]
    Regime(String),

    /// The complete response `F` is infinite for friction exponents `beta >= 2`.
    #[error("response is infinite for beta = {beta} (requires beta < 2)")]
    InfiniteResponse { beta: f64 },

    /// A numerical procedure ran out of its work budget.
    #[error("numerical budget exceeded: {message} (best estimate {estimate:e})")]
    Budget { message: String, estimate: f64 },

    /// Sample data unusable for the requested statistic.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {value}")))
    }
}
