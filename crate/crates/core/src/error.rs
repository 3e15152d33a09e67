use thiserror::Error;

pub type Result<T, E = TdError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TdError {
    #[error("invalid differentiator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The equivalent second-order system has `zeta >= 1`.
    #[error("equivalent linearization is not underdamped (zeta = {zeta})")]
    Overdamped { zeta: f64 },

    /// The effective position or velocity gain vanished.
    #[error("equivalent linearization is degenerate: {0}")]
    Degenerate(String),

    #[error("integration diverged at t = {t} s")]
    Instability { t: f64 },

    #[error("time series has no channel `{0}`")]
    MissingChannel(String),

    #[error("measurement at omega = {omega} rad/s failed: {source}")]
    SweepPoint {
        omega: f64,
        #[source]
        source: Box<TdError>,
    },
}

impl TdError {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            TdError::Overdamped { .. } | TdError::Degenerate(_) | TdError::Instability { .. } => {
                true
            }
            TdError::SweepPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
