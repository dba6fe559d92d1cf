use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShgError {
    /// A numeric argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter failed validation; `field` names the offending quantity.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("resonator is not stable (half-trace of round-trip matrix = {half_trace})")]
    UnstableResonator { half_trace: f64 },

    #[error("integrator produced a non-finite field in segment {segment}")]
    IntegratorBlowup { segment: usize },

    #[error(
        "steady state not reached after {iterations} round trips (last residual {:e})",
        residuals.last().copied().unwrap_or(f64::NAN)
    )]
    NotConverged {
        iterations: usize,
        /// Tail of the residual history, oldest first.
        residuals: Vec<f64>,
    },

    #[error("no interior minimum in [{low}, {high}]: f(low) = {f_low:e}, f(high) = {f_high:e}, best f = {f_best:e} at {x_best}")]
    NoInteriorMinimum {
        low: f64,
        high: f64,
        f_low: f64,
        f_high: f64,
        x_best: f64,
        f_best: f64,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T, E = ShgError> = std::result::Result<T, E>;

pub(crate) fn check_fraction(field: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ShgError::InvalidParameter {
            field,
            reason: format!("{value} is not a fraction in [0, 1]"),
        });
    }
    Ok(())
}

pub(crate) fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(ShgError::InvalidParameter {
            field,
            reason: format!("{value} must be positive and finite"),
        });
    }
    Ok(())
}

pub(crate) fn check_nonnegative(field: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(ShgError::InvalidParameter {
            field,
            reason: format!("{value} must be non-negative and finite"),
        });
    }
    Ok(())
}
