use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("no interior solution: {0}")]
    NoSolution(&'static str),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("infeasible transfer: payment {payment} exceeds resources {resources}")]
    Infeasible { resources: f64, payment: f64 },

    #[error("insolvent: young cannot absorb debt {debt} out of resources {resources}")]
    Insolvent { resources: f64, debt: f64 },

    #[error("risk aversion would be negative: safe target {safe}% exceeds risky target {risky}%")]
    NegativeGamma { safe: f64, risky: f64 },

    #[error("infeasible calibration target: {0}")]
    InfeasibleTarget(String),

    #[error("calibration residuals too large: risky {risky_residual} pp/yr, safe {safe_residual} pp/yr")]
    CalibrationFailed {
        risky_residual: f64,
        safe_residual: f64,
    },

    #[error("singular approximation: denominator {0:e}")]
    Singular(f64),

    #[error("capital diverged in steady-state simulation at period {period}")]
    Divergence { period: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("series do not overlap after alignment")]
    EmptyOverlap,

    #[error("unit mismatch: series `{0}` is fractional, expected percent")]
    UnitMismatch(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
