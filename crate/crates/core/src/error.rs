use thiserror::Error;

/// Failure classes shared by every module. The CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments that violate an operation's preconditions.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Arguments that are well-formed but outside the numerically valid region.
    #[error("domain error: {0}")]
    Domain(String),
    /// Near-caustic propagation time; the spectral path must be used instead.
    #[error("near-caustic time t = {t}: |sin(bt)| = {sin_bt:.3e} is below the guard")]
    NearCaustic { t: f64, sin_bt: f64 },
    /// Time integration produced a non-finite value.
    #[error("divergence at step {step}: {detail}")]
    Divergence { step: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
