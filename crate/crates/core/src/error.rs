use thiserror::Error;

use crate::surface::Side;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {p}^{m} is too large for this operation")]
    FieldTooLarge { p: u64, m: u32 },
    #[error("square roots are not supported in characteristic 2")]
    UnsupportedCharacteristic,
    #[error("expected {expected} {what} coefficients, found {found}")]
    Arity {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate {side} fiber over {point}")]
    DegenerateFiber { side: Side, point: String },
    #[error("point {0} does not lie on the surface")]
    NotOnSurface(String),
    #[error("point is not periodic with period {0}")]
    NotPeriodic(usize),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for failures caused by the mathematics of the input rather than
    /// by malformed arguments.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateFiber { .. }
                | Error::NotOnSurface(_)
                | Error::NotPeriodic(_)
                | Error::Inconsistent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
