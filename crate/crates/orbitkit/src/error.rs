use thiserror::Error;

use crate::rational::Rational;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("pairing constraint violated: <x, y> = {pairing}, expected 1")]
    ConstraintViolated { pairing: Rational },

    #[error("dimension parameter must be at least 2, got {n}")]
    UnsupportedDimension { n: usize },

    #[error("point outside chart domain: {0}")]
    ChartDomain(&'static str),

    #[error("determinant must be positive, got {0}")]
    NonPositiveDeterminant(Rational),

    #[error("matrix does not satisfy the defining equations of the group")]
    NotAMember,

    #[error("operation does not support this group tag")]
    UnsupportedTag,

    #[error("no point realizes this label for n = {n}")]
    EmptyOrbit { n: usize },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
