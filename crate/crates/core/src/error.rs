use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial has odd-degree monomial {exponents:?}; an even polynomial was required")]
    NotEven { exponents: Vec<u32> },

    #[error("momentum |p|_E = {norm:.4} exceeds the grid Nyquist bound {nyquist:.4}")]
    OutOfBand { norm: f64, nyquist: f64 },

    #[error("operation not supported for this test-function class: {0}")]
    Unsupported(String),

    #[error("not a proper orthochronous Lorentz transformation: {0}")]
    NotLorentz(String),

    #[error("Fock space dimension {dimension} exceeds the cap {cap}")]
    DimensionCap { dimension: u128, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
