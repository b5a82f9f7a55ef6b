use thiserror::Error;

use crate::verify::CheckOutcome;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A query or target lies outside the supported range.
    #[error("range error: {0}")]
    Range(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown bound family {0:?}")]
    UnknownFamily(String),

    /// A verification could not be decided within the available precision.
    #[error("inconclusive verification near x = {:?}", .0.witness_x)]
    Inconclusive(Box<CheckOutcome>),

    #[error("invalid theta cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
