use thiserror::Error;

/// Errors produced by the library. The CLI maps `InvalidParameter` to a usage
/// error and everything else to a runtime failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: u64,
        lo: u64,
        hi: u64,
    },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("endpoint counter overflow: 2*d*n = 2*{d}*{n} exceeds u32::MAX")]
    Overflow { n: usize, d: usize },

    #[error("ODE integration diverged at x = {x}: z_{k} = {z} exceeds x")]
    NonConvergence { x: f64, k: usize, z: f64 },

    #[error("fit window too sparse: {0}")]
    SparseWindow(String),

    #[error("too few observations: {0}")]
    TooFewObservations(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("key mismatch: {0}")]
    KeyMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in the open interval (0,1)"
        )))
    }
}
