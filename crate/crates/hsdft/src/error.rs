use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("gamma = {0} lies above the fluid-solid kink; no fluid branch value")]
    OutOfBranch(f64),
    #[error("second derivative of the pressure is undefined at the fluid-solid kink")]
    Kink,
    #[error("derivative order {0} is not supported")]
    InvalidOrder(u32),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the Newton kernel has infinite L1 norm on R^3")]
    InfiniteNorm,
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("no sign change in bracket: {0}")]
    Bracket(String),
    #[error("no touching scale: {0}")]
    NoTouch(String),
    #[error("singular linear system in {0}")]
    Singular(&'static str),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a failing numerical method.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidKernel(_) | Error::InvalidParameter(_) | Error::Domain { .. }
        )
    }
}

pub(crate) fn check_open(name: &'static str, value: f64, lo: f64, hi: f64, domain: &'static str) -> Result<f64> {
    if value.is_finite() && value > lo && value < hi {
        Ok(value)
    } else {
        Err(Error::Domain { name, value, domain })
    }
}
