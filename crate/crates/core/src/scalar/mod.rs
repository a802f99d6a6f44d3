//! Exact rationals, capped-precision p-adics, and the context that ties a
//! choice of `q` to a prime and a weight.

mod padic;
mod rat;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use padic::{padic_arith, ArithOp, PAdic};
pub use rat::{binomial, Rat};

/// Working precision (base-p digits) when none is requested.
pub const DEFAULT_PRECISION: u32 = 8;

/// A value that is either an exact rational or a p-adic approximation.
///
/// Mixed operations embed the rational side into `Q_p` with enough digits
/// that it never limits the result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Exact(Rat),
    PAdic(PAdic),
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Exact(Rat::from(n))
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::PAdic(_) => None,
        }
    }

    pub fn as_padic(&self) -> Option<&PAdic> {
        match self {
            Scalar::PAdic(x) => Some(x),
            Scalar::Exact(_) => None,
        }
    }

    /// Exact zero, or a p-adic zero at its known precision.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::PAdic(x) => x.is_zero(),
        }
    }

    /// Image in `Q_p`; p-adic values pass through unchanged.
    pub fn to_padic(&self, p: u64, precision: u32) -> Result<PAdic> {
        match self {
            Scalar::Exact(r) => Ok(PAdic::from_rat(r, p, precision)),
            Scalar::PAdic(x) if x.p() == p => Ok(x.clone()),
            Scalar::PAdic(x) => Err(Error::PrimeMismatch(x.p(), p)),
        }
    }

    /// Largest `e` with `p^e` known to divide the value; `i64::MAX` for an
    /// exact zero.
    pub fn valuation_bound(&self, p: u64) -> i64 {
        match self {
            Scalar::Exact(r) => r.valuation(p).unwrap_or(i64::MAX),
            Scalar::PAdic(x) => x.valuation_bound(),
        }
    }

    pub fn try_add(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            (Scalar::Exact(a), x) | (x, Scalar::Exact(a)) if a.is_zero() => x.clone(),
            (Scalar::PAdic(a), Scalar::PAdic(b)) => Scalar::PAdic(a.try_add(b)?),
            (Scalar::Exact(a), Scalar::PAdic(b)) | (Scalar::PAdic(b), Scalar::Exact(a)) => {
                Scalar::PAdic(PAdic::embed_like(a, b).try_add(b)?)
            }
        })
    }

    pub fn try_sub(&self, rhs: &Scalar) -> Result<Scalar> {
        self.try_add(&-rhs)
    }

    pub fn try_mul(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (Scalar::Exact(a), _) | (_, Scalar::Exact(a)) if a.is_zero() => Scalar::zero(),
            (Scalar::PAdic(a), Scalar::PAdic(b)) => Scalar::PAdic(a.try_mul(b)?),
            (Scalar::Exact(a), Scalar::PAdic(b)) | (Scalar::PAdic(b), Scalar::Exact(a)) => {
                Scalar::PAdic(PAdic::embed_like(a, b).try_mul(b)?)
            }
        })
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.checked_div(b)?),
            (_, Scalar::Exact(b)) if b.is_zero() => return Err(Error::DivideByZero),
            (Scalar::Exact(a), Scalar::PAdic(_)) if a.is_zero() => Scalar::zero(),
            (Scalar::PAdic(a), Scalar::PAdic(b)) => Scalar::PAdic(a.try_div(b)?),
            (Scalar::Exact(a), Scalar::PAdic(b)) => Scalar::PAdic(PAdic::embed_like(a, b).try_div(b)?),
            (Scalar::PAdic(a), Scalar::Exact(b)) => Scalar::PAdic(a.try_div(&PAdic::embed_like(b, a))?),
        })
    }

    /// Integer power; negative exponents invert.
    pub fn try_pow(&self, e: i64) -> Result<Scalar> {
        match self {
            Scalar::Exact(r) if r.is_zero() && e < 0 => Err(Error::DivideByZero),
            Scalar::Exact(r) => Ok(Scalar::Exact(r.pow(e))),
            Scalar::PAdic(x) => Ok(Scalar::PAdic(x.pow(e)?)),
        }
    }

    /// Panicking form of [`Scalar::try_pow`].
    pub fn pow(&self, e: i64) -> Scalar {
        self.try_pow(e).unwrap_or_else(|err| panic!("{err}"))
    }
}

impl From<Rat> for Scalar {
    fn from(r: Rat) -> Scalar {
        Scalar::Exact(r)
    }
}

impl From<PAdic> for Scalar {
    fn from(x: PAdic) -> Scalar {
        Scalar::PAdic(x)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => r.fmt(f),
            Scalar::PAdic(x) => x.fmt(f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::PAdic(x) => Scalar::PAdic(-x),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

// Operators panic only on a prime mismatch, which a single QContext rules out.
macro_rules! scalar_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_op!(Add, add, try_add);
scalar_op!(Sub, sub, try_sub);
scalar_op!(Mul, mul, try_mul);

/// Which completion of `Q` the computation lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Padic,
}

/// What to do with a Dedekind-sum term whose reduced residue is divisible
/// by `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResiduePolicy {
    #[default]
    Reject,
    Skip,
}

/// Prime, `q`, weight and precision shared by every computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QContext {
    mode: Mode,
    p: Option<u64>,
    q: Scalar,
    alpha: u32,
    precision: u32,
    literal_mode: bool,
    residue_policy: ResiduePolicy,
}

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl QContext {
    /// Rational mode: `q` must avoid `0, 1, -1`.
    pub fn rational(q: Rat, alpha: u32) -> Result<QContext> {
        if q.is_zero() || q.is_one() || (-&q).is_one() {
            return Err(Error::DegenerateQ(format!("q = {q} (must not be 0, 1 or -1)")));
        }
        if alpha == 0 {
            return Err(Error::InvalidContext("alpha must be positive".into()));
        }
        Ok(QContext {
            mode: Mode::Rational,
            p: None,
            q: Scalar::Exact(q),
            alpha,
            precision: DEFAULT_PRECISION,
            literal_mode: false,
            residue_policy: ResiduePolicy::Reject,
        })
    }

    /// p-adic mode: `p` an odd prime and `|1 - q|_p < 1`. A rational `q`
    /// stays exact; precision is used whenever a value leaves the rationals.
    pub fn padic(p: u64, q: impl Into<Scalar>, alpha: u32, precision: u32) -> Result<QContext> {
        let q = q.into();
        if !is_odd_prime(p) {
            return Err(Error::InvalidContext(format!("p = {p} is not an odd prime")));
        }
        if alpha == 0 {
            return Err(Error::InvalidContext("alpha must be positive".into()));
        }
        if precision == 0 {
            return Err(Error::InvalidContext("precision must be positive".into()));
        }
        if let Scalar::PAdic(x) = &q {
            if x.p() != p {
                return Err(Error::PrimeMismatch(x.p(), p));
            }
        }
        let shifted = q.try_sub(&Scalar::one())?;
        if shifted.is_zero() {
            return Err(Error::DegenerateQ("q = 1".into()));
        }
        if shifted.valuation_bound(p) < 1 {
            return Err(Error::InvalidContext(format!("|1 - q|_{p} < 1 fails for q = {q}")));
        }
        Ok(QContext {
            mode: Mode::Padic,
            p: Some(p),
            q,
            alpha,
            precision,
            literal_mode: false,
            residue_policy: ResiduePolicy::Reject,
        })
    }

    pub fn with_literal_mode(mut self, on: bool) -> QContext {
        self.literal_mode = on;
        self
    }

    pub fn with_residue_policy(mut self, policy: ResiduePolicy) -> QContext {
        self.residue_policy = policy;
        self
    }

    pub fn with_alpha(&self, alpha: u32) -> QContext {
        assert!(alpha > 0);
        QContext { alpha, ..self.clone() }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn q(&self) -> &Scalar {
        &self.q
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn literal_mode(&self) -> bool {
        self.literal_mode
    }

    pub fn residue_policy(&self) -> ResiduePolicy {
        self.residue_policy
    }

    /// The prime; only p-adic contexts have one.
    pub fn p(&self) -> Result<u64> {
        self.p.ok_or_else(|| Error::ModeError("rational mode has no prime".into()))
    }

    pub fn require_padic(&self, what: &str) -> Result<u64> {
        match self.mode {
            Mode::Padic => self.p(),
            Mode::Rational => Err(Error::ModeError(format!("{what} requires p-adic mode"))),
        }
    }

    /// `q^e`.
    pub fn q_pow(&self, e: i64) -> Scalar {
        self.q.pow(e)
    }
}

/// Teichmüller representative: the `(p-1)`-th root of unity congruent to
/// `x` mod `p`, as the stable value of `x, x^p, x^(p^2), ...`.
pub fn teichmuller(x: &PAdic) -> Result<PAdic> {
    if x.valuation() != Some(0) {
        return Err(Error::NotAUnit(x.to_string()));
    }
    let p = x.p() as i64;
    let mut y = x.clone();
    for _ in 0..x.precision() {
        let next = y.pow(p)?;
        if next == y {
            break;
        }
        y = next;
    }
    Ok(y)
}

/// `C(s, j)` for `s` in `Z_p`. The numerator product and the division by
/// `j!` go through tracked arithmetic, so the reported precision already
/// accounts for the `v_p(j!)` digits the division consumes.
pub fn padic_binomial(s: &PAdic, j: u64) -> Result<PAdic> {
    if s.valuation_bound() < 0 {
        return Err(Error::OutOfRange(format!("C(s, j) needs s in Z_p, got {s}")));
    }
    let p = s.p();
    let work = (s.abs_precision().max(1)) as u32;
    if j == 0 {
        return Ok(PAdic::one(p, work));
    }
    let mut num = s.clone();
    for i in 1..j {
        let shifted = s.try_sub(&PAdic::embed_like(&Rat::from(i as i64), s))?;
        num = num.try_mul(&shifted)?;
    }
    let fact = (1..=j).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
    let fact = Rat::from(fact);
    num.try_div(&PAdic::embed_like(&fact, &num))
}

/// `C(m, j)` for an exact integer `m`, embedded with `v_p(j!)` guard digits
/// so the result carries the full `precision`.
pub fn padic_binomial_int(m: i64, j: u64, p: u64, precision: u32) -> Result<PAdic> {
    let guard = factorial_valuation(j, p);
    let s = PAdic::from_int(m, p, precision + guard as u32 + 1);
    let c = padic_binomial(&s, j)?;
    Ok(c.truncate_abs(precision as i64))
}

/// `v_p(j!) = (j - digitsum_p(j)) / (p - 1)`.
pub fn factorial_valuation(j: u64, p: u64) -> u64 {
    let mut digits = 0;
    let mut n = j;
    while n > 0 {
        digits += n % p;
        n /= p;
    }
    (j - digits) / (p - 1)
}

/// `u^s = sum_j C(s, j) (u - 1)^j` for a 1-unit `u` and `s` in `Z_p`.
/// Terms stop once `(u - 1)^j` vanishes at the precision of `u`.
pub fn unit_power(u: &PAdic, s: &PAdic) -> Result<PAdic> {
    if u.p() != s.p() {
        return Err(Error::PrimeMismatch(u.p(), s.p()));
    }
    if u.valuation() != Some(0) {
        return Err(Error::NotOneUnit);
    }
    let p = u.p();
    let target = u.abs_precision();
    let one = PAdic::one(p, target as u32);
    let t = u.try_sub(&one)?;
    if t.valuation_bound() < 1 {
        return Err(Error::NotOneUnit);
    }
    if s.valuation_bound() < 0 {
        return Err(Error::OutOfRange(format!("exponent must lie in Z_p, got {s}")));
    }
    if t.is_zero() {
        return Ok(one);
    }
    let tv = t.valuation().unwrap();
    let terms = (target + tv - 1) / tv;
    let mut acc = one.clone();
    let mut t_pow = one;
    for j in 1..=terms as u64 {
        t_pow = t_pow.try_mul(&t)?;
        let term = padic_binomial(s, j)?.try_mul(&t_pow)?;
        acc = acc.try_add(&term)?;
    }
    Ok(acc.truncate_abs(target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(n: i64, p: u64, prec: u32) -> PAdic {
        PAdic::from_int(n, p, prec)
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(&pa(1, 5, 2)).unwrap(), pa(1, 5, 2));
        assert_eq!(teichmuller(&pa(2, 5, 2)).unwrap(), pa(7, 5, 2));
        assert_eq!(teichmuller(&pa(4, 5, 2)).unwrap(), pa(-1, 5, 2));
        assert!(matches!(teichmuller(&pa(5, 5, 2)), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn binomial_examples() {
        let s = pa(-1, 3, 6);
        assert_eq!(padic_binomial(&s, 0).unwrap(), pa(1, 3, 6));
        assert_eq!(padic_binomial(&s, 1).unwrap(), s);
        assert!(padic_binomial(&s, 2).unwrap().eq_at(&pa(1, 3, 6), 6));
        assert_eq!(factorial_valuation(6, 3), 2);
        assert_eq!(factorial_valuation(25, 5), 6);
    }

    #[test]
    fn unit_power_examples() {
        let u = PAdic::from_rat(&Rat::new(6, 11), 5, 8);
        let zero = pa(0, 5, 8);
        assert_eq!(unit_power(&u, &zero).unwrap(), pa(1, 5, 8));
        assert!(unit_power(&u, &pa(1, 5, 8)).unwrap().eq_at(&u, 8));
        let inv = unit_power(&u, &pa(-1, 5, 10)).unwrap();
        assert!((&u * &inv).eq_at(&pa(1, 5, 8), 8));
        assert_eq!(unit_power(&pa(2, 5, 8), &zero), Err(Error::NotOneUnit));
    }

    #[test]
    fn context_validation() {
        assert!(QContext::rational(Rat::from(1), 1).is_err());
        assert!(QContext::rational(Rat::from(-1), 1).is_err());
        assert!(QContext::rational(Rat::zero(), 1).is_err());
        assert!(QContext::rational(Rat::new(2, 3), 2).is_ok());
        assert!(QContext::padic(5, Rat::from(6), 1, 8).is_ok());
        assert!(QContext::padic(5, Rat::from(2), 1, 8).is_err());
        assert!(QContext::padic(4, Rat::from(5), 1, 8).is_err());
        assert!(QContext::padic(2, Rat::from(3), 1, 8).is_err());
        assert!(QContext::rational(Rat::from(2), 1).unwrap().p().is_err());
    }

    #[test]
    fn mixed_scalar_arithmetic() {
        let x = Scalar::PAdic(PAdic::from_rat(&Rat::new(1, 7), 5, 4));
        let seven = Scalar::int(7);
        let one = &x * &seven;
        assert!(one.as_padic().unwrap().eq_at(&pa(1, 5, 4), 4));
        assert_eq!(&x * &Scalar::zero(), Scalar::zero());
        assert_eq!(&x + &Scalar::zero(), x);
    }
}
