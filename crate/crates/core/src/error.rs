use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("layout mismatch: {0}")]
    BadLayout(String),

    #[error("derivative produced a non-finite value at t = {t}")]
    NonFinite { t: f64 },

    #[error("eigenvalue branch {branch} is degenerate (gap {gap:e})")]
    DegenerateBranch { branch: usize, gap: f64 },

    #[error("no static circle: g^2/2 - 2 omega_s^2/g^2 = {radius_sq} is not positive")]
    NoStaticCircle { radius_sq: f64 },

    #[error("closed-form static circle requires m*omega = 1 (got {0})")]
    MassFrequencyNotUnit(f64),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("phase point ({x0}, {p0}) is outside the region reachable by a ground/first-excited superposition")]
    Unrepresentable { x0: f64, p0: f64 },

    #[error("trajectories are not on a common sample grid")]
    GridMismatch,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value for '{key}': {msg}")]
    Validation { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(key: &str, msg: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        msg: msg.into(),
    }
}
