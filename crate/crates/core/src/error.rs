use thiserror::Error;

/// Errors raised by the library. Verification failures are not errors; they
/// are reported through [`crate::verify::Report`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero is undefined")]
    ZeroInput,
    #[error("binomial C({m}, {k}) requested with k > m")]
    BinomialRange { m: String, k: u64 },
    #[error("negative exponent with even base {0}")]
    EvenBaseNegativeExponent(String),
    #[error("requested {bits} bits from a value known to {prec} bits")]
    BitsExceedPrecision { bits: u32, prec: u32 },
    #[error("precision {prec} does not fit a {capacity}-bit word")]
    Capacity { prec: u32, capacity: u32 },
    #[error("precision must be positive")]
    ZeroPrecision,
    #[error("argument known to {prec} bits but lg(n) = {lg}")]
    PrecisionUnderflow { prec: u32, lg: u32 },
    #[error("invalid binary digit {0:?}")]
    InvalidDigit(char),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed record: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
