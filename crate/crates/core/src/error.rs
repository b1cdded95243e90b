use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("operands come from different field contexts")]
    CtxMismatch,
    #[error("dilation factor must be nonzero")]
    ZeroDilation,
    #[error("set too small: {0}")]
    SetTooSmall(String),
    #[error("zero element not allowed in {0}")]
    ZeroElement(String),
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("line parameter is zero")]
    ZeroParameter,
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// An identity that holds unconditionally was violated. Always a bug.
    #[error("exact identity violated: {0}")]
    HardAssertion(String),
}

impl Error {
    pub fn is_hard_assertion(&self) -> bool {
        matches!(self, Error::HardAssertion(_))
    }
}
