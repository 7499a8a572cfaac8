use thiserror::Error;

/// Everything that can go wrong while building, extending or checking a witness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("party index {index} out of range for {parties} parties (indices are 1-based)")]
    BadPartyIndex { index: usize, parties: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("purification selection out of range: {0}")]
    SelectionOutOfRange(String),

    #[error("c = {c} lies outside the admissible interval {interval}")]
    COutOfInterval { c: f64, interval: String },

    #[error("basis is not orthonormal (Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("operation {0} is not supported for this witness form")]
    FormNotSupported(&'static str),

    #[error("selection does not contain a maximum-eigenvalue eigenvector")]
    MaxEigenvalueNotSelected,

    #[error("c' = {c_prime} must satisfy {lower} <= c' < {upper}")]
    CPrimeOutOfInterval { c_prime: f64, lower: f64, upper: f64 },

    #[error("tail {0} is not a normalized pure state")]
    UnnormalizedTail(usize),

    #[error("tail {0} has a vanishing maximum eigenvalue")]
    ZeroMaxEigenvalue(usize),

    #[error("enumeration of {rank}x{ancilla_dim} selections exceeds the cap of 64 (closed-form count {count})")]
    CountTooLarge { rank: usize, ancilla_dim: usize, count: u128 },

    #[error("dimensions {0:?} are not supported by the grid oracle")]
    UnsupportedDims(Vec<usize>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name, used in machine-readable error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian(_) => "NotHermitian",
            Error::NoConvergence(_) => "NoConvergence",
            Error::BadPartyIndex { .. } => "BadPartyIndex",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidDims(_) => "InvalidDims",
            Error::InvalidState(_) => "InvalidState",
            Error::ParamOutOfRange(_) => "ParamOutOfRange",
            Error::SelectionOutOfRange(_) => "SelectionOutOfRange",
            Error::COutOfInterval { .. } => "COutOfInterval",
            Error::NotOrthonormal(_) => "NotOrthonormal",
            Error::FormNotSupported(_) => "FormNotSupported",
            Error::MaxEigenvalueNotSelected => "MaxEigenvalueNotSelected",
            Error::CPrimeOutOfInterval { .. } => "CPrimeOutOfInterval",
            Error::UnnormalizedTail(_) => "UnnormalizedTail",
            Error::ZeroMaxEigenvalue(_) => "ZeroMaxEigenvalue",
            Error::CountTooLarge { .. } => "CountTooLarge",
            Error::UnsupportedDims(_) => "UnsupportedDims",
            Error::Parse(_) => "ParseError",
        }
    }
}
