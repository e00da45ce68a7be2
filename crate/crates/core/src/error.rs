use thiserror::Error;

use crate::scalar::{NotRepresentable, ScalarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve is singular: 4λ³ + 27λ² vanishes at λ = {0}")]
    SingularCurve(String),
    #[error("point is not on the curve: {0}")]
    OffCurve(String),
    #[error(transparent)]
    NotRepresentable(#[from] NotRepresentable),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("inconsistent derivation: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
