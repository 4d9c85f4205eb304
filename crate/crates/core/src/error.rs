use thiserror::Error;

/// Errors produced by model validation, the solvers and the experiment driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arrival {index}: time {time} s is not after the previous instant {previous} s")]
    NonIncreasingArrival { index: usize, time: f64, previous: f64 },
    #[error("arrival {index}: time {time} s is not inside the horizon (0, {horizon}) s")]
    ArrivalOutsideHorizon { index: usize, time: f64, horizon: f64 },
    #[error("arrival {index}: energy {amount} J must be positive")]
    NonPositiveArrival { index: usize, amount: f64 },
    #[error("initial energy {0} J must be non-negative")]
    NegativeInitialEnergy(f64),
    #[error("horizon {0} s must be positive and finite")]
    InvalidHorizon(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("power {0} W must be non-negative")]
    NegativePower(f64),
    #[error("EE supremum at P -> 0, no interior maximizer (circuit power is zero)")]
    NoInteriorMaximizer,
    #[error("bisection failed to bracket a sign change of the EE derivative")]
    BracketNotFound,
    #[error("schedule: {0}")]
    InvalidSchedule(String),
    #[error("schedule horizon {schedule} s does not match profile horizon {profile} s")]
    HorizonMismatch { schedule: f64, profile: f64 },
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonIncreasingArrival { .. }
            | Error::ArrivalOutsideHorizon { .. }
            | Error::NonPositiveArrival { .. }
            | Error::NegativeInitialEnergy(_)
            | Error::InvalidHorizon(_) => "invalid_profile",
            Error::InvalidParameter { .. } | Error::NegativePower(_) => "invalid_parameter",
            Error::NoInteriorMaximizer | Error::BracketNotFound => "ee_search",
            Error::InvalidSchedule(_) | Error::HorizonMismatch { .. } => "invalid_schedule",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {value}") })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be non-negative and finite, got {value}") })
    }
}
