use thiserror::Error;

/// Errors raised while validating a configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{0}` must be strictly positive")]
    NonPositive(String),
    #[error("field `{0}` is out of range: {1}")]
    OutOfRange(String, String),
    #[error("drive is overdetermined: {0}")]
    OverdeterminedDrive(String),
    #[error("unit mismatch on `{0}`: {1}")]
    UnitMismatch(String, String),
    #[error("wells: atom counts sum to {sum}, expected {expected}")]
    WellCountMismatch { sum: u64, expected: u64 },
    #[error("malformed configuration: {0}")]
    Malformed(String),
}

/// Errors raised by the physics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("dispersive model diverges at zero atom-cavity detuning")]
    DivergentDispersive,
    #[error("well list is empty")]
    EmptyWells,
    #[error("closed loop is unstable: pole with growth rate {growth_rate:e} rad/s")]
    InstabilityDetected { growth_rate: f64 },
    #[error("no fixed point in bracket [{lo:e}, {hi:e}]")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("integrator step size underflow at t = {t:e} s (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("sideband thermometry requires a resonant probe, got detuning {0:e} rad/s")]
    OffResonantProbe(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = PhysicsError> = std::result::Result<T, E>;
