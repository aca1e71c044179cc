use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A window description or other input record failed validation.
    #[error("invalid {field}: {detail}")]
    Validation { field: &'static str, detail: String },

    /// A numeric parameter is outside the domain an operation accepts.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// `b` lies at or below `2/(N+a)`, where the three-translate construction degenerates.
    #[error("ParameterOutOfRange: b = {b} <= 2/(N+a) = {bound}")]
    ParameterOutOfRange { b: f64, bound: f64 },

    /// `G(x)` is numerically singular somewhere on `[-a/2, a/2]`.
    #[error("SingularMatrix at x = {x}: |det G| = {abs_det:e}")]
    SingularMatrix { x: f64, abs_det: f64 },

    #[error("DualityNotVerified: max residual {max_residual:e} exceeds tolerance {tolerance:e}")]
    DualityNotVerified { max_residual: f64, tolerance: f64 },

    /// Sufficient and obstructing rules fired at the same lattice point.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            field,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
