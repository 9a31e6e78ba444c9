use thiserror::Error;

/// Error kinds shared by every module.
///
/// The variants map one-to-one onto the exit-code classes used by the command line
/// driver: parameter and domain problems are caller mistakes, numeric problems mean
/// a computation did not reach its accuracy target, resource problems mean a
/// configured memory or size cap was hit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("malformed artifact: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        param(format!("stability index must lie in (0, 2), got {alpha}"))
    }
}

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if hurst.is_finite() && hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        param(format!("Hurst index must lie in (0, 1), got {hurst}"))
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        param(format!("density parameter eps must be positive, got {eps}"))
    }
}
