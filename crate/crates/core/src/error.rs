use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run or grid configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A coherent-state parameter exceeded the configured overflow bound.
    #[error("overflow: |{quantity}| = {magnitude:.3e} exceeds bound {bound:.3e}")]
    Overflow {
        quantity: &'static str,
        magnitude: f64,
        bound: f64,
    },

    /// Finite-difference truncation error estimate is too large for the
    /// requested operation.
    #[error("resolution error: estimated truncation {estimate:.3e} above limit {limit:.3e}")]
    Resolution { estimate: f64, limit: f64 },

    /// A computed quantity missed its accuracy requirement.
    #[error("accuracy error: {what} defect {defect:.3e} above tolerance {tolerance:.3e}")]
    Accuracy {
        what: &'static str,
        defect: f64,
        tolerance: f64,
    },

    /// A linear system that should be regular came out singular.
    #[error("internal error: singular system in {0}")]
    Singular(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
