use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, MafError>;

#[derive(Debug, Error)]
pub enum MafError {
    #[error("invalid group element: |a| = {modulus} (must be 1)")]
    InvalidElement { modulus: f64 },

    #[error("invalid endomorphism: {0}")]
    InvalidEndomorphism(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("non-finite value while evaluating {context} at z = {z}")]
    NonFinite { context: &'static str, z: C64 },

    #[error("element {0} is not in the enumerated word closure of Γ")]
    UnknownElement(String),

    #[error("gauge is path dependent: L-paths disagree by {0:e}")]
    GaugeNotClosed(f64),

    #[error("gauge has imaginary part {0:e} after normalisation")]
    GaugeConvention(f64),

    #[error("magnetic field B = {0} must be positive")]
    NonPositiveField(f64),

    #[error("magnetic field is not constant: spread {0:e}")]
    NonConstantField(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl MafError {
    /// Process exit code under the CLI contract: configuration and usage
    /// problems map to 2.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
