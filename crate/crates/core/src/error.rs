use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("invalid jet: {0}")]
    InvalidJet(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("conjugate sup attained at the sample boundary t = {t_max}; enlarge the range")]
    RangeExceeded { t_max: f64 },

    #[error("point off-grid: {point:?} is not within half a cell of any node")]
    PointOffGrid { point: Vec<f64> },

    #[error("not extendable: {0}")]
    NotExtendable(String),

    #[error("envelope iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("numerical pathology: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
