use thiserror::Error;

/// Errors raised by the arithmetic kernels and the sum evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument must be positive (got 0 for `{0}`)")]
    Zero(&'static str),

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("range of {len} entries exceeds the memory budget of {budget} entries")]
    RangeTooLarge { len: u64, budget: u64 },

    #[error("{value} exceeds the supported bound {bound}")]
    TooLarge { value: u64, bound: u64 },

    #[error("{a} has no inverse modulo {m}")]
    NoInverse { a: i64, m: u64 },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("modulus {q} exceeds the direct-evaluation budget {budget}; use the CRT path")]
    OverDirectBudget { q: u64, budget: u64 },

    #[error("prime power {p}^{k} has no closed form and exceeds the direct budget")]
    UnsupportedModulus { p: u64, k: u32 },

    #[error("{p} divides the argument {a}")]
    PrimeDividesArgument { p: u64, a: i64 },

    #[error("degenerate Möbius map (determinant vanishes modulo {0})")]
    DegenerateMap(u64),

    #[error("{0} is not cube-free")]
    NotCubeFree(u64),

    #[error("{0} does not divide {1}")]
    NotDivisor(u64, u64),

    #[error("parameter `{name}` out of range: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("unsupported correlation shape: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(name: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Parameter {
        name,
        reason: reason.into(),
    })
}
