use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error(transparent)]
    Quadrature(#[from] QuadError),

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval {
        a: f64,
        b: f64,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected token {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("malformed number `{0}`")]
    BadNumber(String),
}

/// Syntax error with the byte offset into the source where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

/// Evaluation left the mathematical domain of a sub-expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{expr}` at x = {at}: {reason}")]
pub struct DomainError {
    pub expr: String,
    pub at: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("subdivision cap of {cap} exceeded (estimated error {error_estimate:e})")]
    SubdivisionCap { cap: usize, error_estimate: f64 },
    #[error("non-finite integrand value {value} at {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("invalid integration bounds [{lo}, {hi}]")]
    BadBounds { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("kink points must be sorted and strictly inside the bounds")]
    BadKinks,
}
