use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero has no factorization")]
    ZeroFactorization,
    #[error("{0} is not prime")]
    NotPrime(u128),
    #[error("{0} is not a prime power")]
    NotPrimePower(u128),
    #[error("field of order {p}^{degree} exceeds the configured limit")]
    FieldTooLarge { p: u64, degree: u32 },
    #[error("invalid degree: {0}")]
    InvalidDegree(u32),
    #[error("division by zero in the field")]
    ZeroInverse,
    #[error("the zero element has no multiplicative order")]
    ZeroOrder,
    #[error("{e} does not divide the group order {order}")]
    NotDivisor { e: u128, order: u128 },
    #[error("polynomial is not monic of the expected degree")]
    NotMonic,
    #[error("modulus polynomial is reducible")]
    Reducible,
    #[error("{what}: size {size} exceeds bound {bound}")]
    TooLarge {
        what: &'static str,
        size: u128,
        bound: u128,
    },
    #[error("sieve plan does not partition the primes of q^n - 1: {0}")]
    BadPlan(String),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
