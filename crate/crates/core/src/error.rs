use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dyadic position {position} out of range at level {level}")]
    InvalidIndex { level: u32, position: u64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("unsupported Besov parameters p={p}, q={q}: only (2,2) and (4,4) are implemented")]
    UnsupportedBesov { p: f64, q: f64 },

    #[error("quadrature on [{a}, {b}] did not converge (error estimate {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("root finding did not converge for target {target}")]
    RootFinding { target: f64 },

    #[error("point {0} lies outside [0, 1)")]
    PointOutOfRange(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
