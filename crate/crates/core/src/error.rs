use thiserror::Error;

/// Failure modes shared by every analysis routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular or numerically singular")]
    Singular,
    #[error("spectrum is complex: imaginary part {imag:.3e} exceeds tolerance {tol:.3e}")]
    ComplexSpectrum { imag: f64, tol: f64 },
    #[error("Jordan chain construction failed: {0}")]
    IllConditioned(String),
    #[error("eigenvalue {lambda} lies outside [0, 1)")]
    EigenvalueOutOfRange { lambda: f64 },
    #[error("spectrum has repeated eigenvalues; use the Jordan formula")]
    RepeatedEigenvalues,
    #[error("two Jordan blocks share the eigenvalue {lambda}")]
    SharedBlockEigenvalue { lambda: f64 },
    #[error("eigenvalue {lambda} has modulus <= 1; controllability region is unbounded")]
    NotAntiStable { lambda: f64 },
    #[error("closed-form volumes need a single input, got r = {r}")]
    MultiInputUnsupported { r: usize },
    #[error("all generators are parallel")]
    Degenerate,
    #[error("operation requires dimension 2, got {n}")]
    DimensionUnsupported { n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Coarse grouping used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Structural,
    Unsupported,
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Singular => "Singular",
            Error::ComplexSpectrum { .. } => "ComplexSpectrum",
            Error::IllConditioned(_) => "IllConditioned",
            Error::EigenvalueOutOfRange { .. } => "EigenvalueOutOfRange",
            Error::RepeatedEigenvalues => "RepeatedEigenvalues",
            Error::SharedBlockEigenvalue { .. } => "SharedBlockEigenvalue",
            Error::NotAntiStable { .. } => "NotAntiStable",
            Error::MultiInputUnsupported { .. } => "MultiInputUnsupported",
            Error::Degenerate => "Degenerate",
            Error::DimensionUnsupported { .. } => "DimensionUnsupported",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonFinite | Error::DimensionMismatch(_) | Error::InvalidArgument(_) => {
                ErrorClass::Input
            }
            Error::MultiInputUnsupported { .. } | Error::DimensionUnsupported { .. } => {
                ErrorClass::Unsupported
            }
            _ => ErrorClass::Structural,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
