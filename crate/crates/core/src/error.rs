use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by a value indistinguishable from zero at its precision")]
    DivideByZero,
    #[error("operands live in different p-adic fields (p = {0} vs p = {1})")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not a p-adic unit")]
    NotAUnit(String),
    #[error("base of a p-adic power must be congruent to 1 mod p")]
    NotOneUnit,
    #[error("degenerate q: {0}")]
    DegenerateQ(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("operation not available in this mode: {0}")]
    ModeError(String),
    #[error("no convergence up to level {level} (last delta valuation {last_delta_valuation})")]
    NoConvergence { level: u32, last_delta_valuation: i64 },
    #[error("modulus {0} must be odd")]
    EvenModulus(u64),
    #[error("gcd({0}, {1}) != 1")]
    NotCoprime(u64, u64),
    #[error("base exponent {l} is not a multiple of k = {k}")]
    BaseNotMultiple { k: u64, l: u64 },
    #[error("series in s does not converge: p does not divide N = {0}")]
    SeriesDivergence(u64),
    #[error("reduced residue {residue} is divisible by p = {p}")]
    ResidueDivisibleByP { residue: u64, p: u64 },
    #[error("exponent q^({0}) is not integral")]
    FractionalExponent(String),
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
