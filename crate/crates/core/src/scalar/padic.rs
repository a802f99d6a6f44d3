//! Capped-precision p-adic numbers.
//!
//! A nonzero value is stored as `unit * p^valuation` where the unit is known
//! modulo `p^precision`. Zero carries the absolute bound it is known to: the
//! value is `0 mod p^abs_precision` and nothing more.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rat::{int_valuation, Rat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Zero { abs_precision: i64 },
    Nonzero { valuation: i64, unit: BigInt, precision: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdic {
    p: u64,
    repr: Repr,
}

/// Binary operation selector for [`padic_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn pow_p(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

impl PAdic {
    /// Builds `unit * p^valuation` with the unit known mod `p^precision`.
    /// The unit is normalized; if it is divisible by `p` the surplus is moved
    /// into the valuation (and the precision shrinks accordingly).
    pub fn new(p: u64, valuation: i64, unit: BigInt, precision: u32) -> PAdic {
        assert!(precision >= 1, "precision must be positive");
        let abs = valuation + precision as i64;
        let m = unit.mod_floor(&pow_p(p, precision));
        if m.is_zero() {
            return PAdic::zero(p, abs);
        }
        let k = int_valuation(&m, p);
        let v = valuation + k;
        let r = (abs - v) as u32;
        let unit = (m / pow_p(p, k as u32)).mod_floor(&pow_p(p, r));
        PAdic { p, repr: Repr::Nonzero { valuation: v, unit, precision: r } }
    }

    /// Zero known modulo `p^abs_precision`.
    pub fn zero(p: u64, abs_precision: i64) -> PAdic {
        PAdic { p, repr: Repr::Zero { abs_precision } }
    }

    pub fn one(p: u64, precision: u32) -> PAdic {
        PAdic::from_int(1, p, precision)
    }

    pub fn from_int(n: i64, p: u64, precision: u32) -> PAdic {
        PAdic::from_rat(&Rat::from(n), p, precision)
    }

    /// Image of a rational in `Q_p` with `precision` significant digits.
    pub fn from_rat(x: &Rat, p: u64, precision: u32) -> PAdic {
        assert!(precision >= 1, "precision must be positive");
        if x.is_zero() {
            return PAdic::zero(p, precision as i64);
        }
        let a = int_valuation(x.numer(), p);
        let b = int_valuation(x.denom(), p);
        let modulus = pow_p(p, precision);
        let num = x.numer() / pow_p(p, a as u32);
        let den = x.denom() / pow_p(p, b as u32);
        let inv = mod_inverse(&den, &modulus).expect("denominator stripped of p is a unit");
        let unit = (num * inv).mod_floor(&modulus);
        PAdic { p, repr: Repr::Nonzero { valuation: a - b, unit, precision } }
    }

    /// Embeds an exact rational with enough digits that it never limits the
    /// precision of an operation against `like`.
    pub fn embed_like(x: &Rat, like: &PAdic) -> PAdic {
        let vx = x.valuation(like.p).unwrap_or(0);
        let need = (like.abs_precision() - vx).max(like.precision() as i64).max(1);
        PAdic::from_rat(x, like.p, need as u32)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// `None` for zero (valuation `+inf`).
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { valuation, .. } => Some(*valuation),
        }
    }

    /// Largest `e` such that the value is known to be divisible by `p^e`.
    pub fn valuation_bound(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs_precision } => *abs_precision,
            Repr::Nonzero { valuation, .. } => *valuation,
        }
    }

    /// Significant digits of the unit; 0 for zero.
    pub fn precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { precision, .. } => *precision,
        }
    }

    /// The value is known modulo `p^abs_precision`.
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs_precision } => *abs_precision,
            Repr::Nonzero { valuation, precision, .. } => valuation + *precision as i64,
        }
    }

    pub fn unit(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// `|x|_p = p^(-valuation)`; zero maps to 0.
    pub fn norm(&self) -> Rat {
        match self.valuation() {
            None => Rat::zero(),
            Some(v) => Rat::from(self.p as i64).pow(-v),
        }
    }

    /// Least-significant-first base-p digits of the unit.
    pub fn unit_digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero { .. } => Vec::new(),
            Repr::Nonzero { unit, precision, .. } => {
                let p = BigInt::from(self.p);
                let mut u = unit.clone();
                (0..*precision)
                    .map(|_| {
                        let (q, r) = u.div_mod_floor(&p);
                        u = q;
                        r.to_u64().unwrap()
                    })
                    .collect()
            }
        }
    }

    /// Forgets everything beyond `p^abs`.
    pub fn truncate_abs(&self, abs: i64) -> PAdic {
        match &self.repr {
            Repr::Zero { abs_precision } => PAdic::zero(self.p, (*abs_precision).min(abs)),
            Repr::Nonzero { valuation, unit, precision } => {
                if abs <= *valuation {
                    return PAdic::zero(self.p, abs);
                }
                let r = (*precision).min((abs - valuation) as u32);
                PAdic::new(self.p, *valuation, unit.clone(), r)
            }
        }
    }

    /// True when `self - other` is known to be divisible by `p^n`.
    pub fn eq_at(&self, other: &PAdic, n: i64) -> bool {
        (self - other).valuation_bound() >= n
    }

    /// Integer representative of the value modulo `p^abs_precision`, or
    /// `None` when the valuation is negative.
    pub fn residue(&self) -> Option<BigInt> {
        match &self.repr {
            Repr::Zero { .. } => Some(BigInt::zero()),
            Repr::Nonzero { valuation, unit, .. } if *valuation >= 0 => {
                Some(unit * pow_p(self.p, *valuation as u32))
            }
            _ => None,
        }
    }

    fn check_prime(&self, other: &PAdic) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        let p = self.p;
        let abs = self.abs_precision().min(other.abs_precision());
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => Ok(PAdic::zero(p, abs)),
            (Repr::Zero { .. }, _) => Ok(other.truncate_abs(abs)),
            (_, Repr::Zero { .. }) => Ok(self.truncate_abs(abs)),
            (
                Repr::Nonzero { valuation: va, unit: ua, .. },
                Repr::Nonzero { valuation: vb, unit: ub, .. },
            ) => {
                let vm = (*va).min(*vb);
                if abs <= vm {
                    return Ok(PAdic::zero(p, abs));
                }
                let x = ua * pow_p(p, (va - vm) as u32) + ub * pow_p(p, (vb - vm) as u32);
                Ok(PAdic::new(p, vm, x, (abs - vm) as u32))
            }
        }
    }

    pub fn try_sub(&self, other: &PAdic) -> Result<PAdic> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        let p = self.p;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero { abs_precision: a }, Repr::Zero { abs_precision: b }) => {
                PAdic::zero(p, a.saturating_add(*b))
            }
            (Repr::Zero { abs_precision }, Repr::Nonzero { valuation, .. })
            | (Repr::Nonzero { valuation, .. }, Repr::Zero { abs_precision }) => {
                PAdic::zero(p, abs_precision.saturating_add(*valuation))
            }
            (
                Repr::Nonzero { valuation: va, unit: ua, precision: ra },
                Repr::Nonzero { valuation: vb, unit: ub, precision: rb },
            ) => {
                let r = (*ra).min(*rb);
                PAdic {
                    p,
                    repr: Repr::Nonzero {
                        valuation: va + vb,
                        unit: (ua * ub).mod_floor(&pow_p(p, r)),
                        precision: r,
                    },
                }
            }
        })
    }

    pub fn try_div(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        let p = self.p;
        match (&self.repr, &other.repr) {
            (_, Repr::Zero { .. }) => Err(Error::DivideByZero),
            (Repr::Zero { abs_precision }, Repr::Nonzero { valuation, .. }) => {
                Ok(PAdic::zero(p, abs_precision.saturating_sub(*valuation)))
            }
            (
                Repr::Nonzero { valuation: va, unit: ua, precision: ra },
                Repr::Nonzero { valuation: vb, unit: ub, precision: rb },
            ) => {
                let r = (*ra).min(*rb);
                let m = pow_p(p, r);
                let inv = mod_inverse(ub, &m).expect("unit is invertible");
                Ok(PAdic {
                    p,
                    repr: Repr::Nonzero {
                        valuation: va - vb,
                        unit: (ua * inv).mod_floor(&m),
                        precision: r,
                    },
                })
            }
        }
    }

    pub fn inv(&self) -> Result<PAdic> {
        let one = PAdic::from_int(1, self.p, self.precision().max(1));
        one.try_div(self)
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<PAdic> {
        match &self.repr {
            Repr::Zero { abs_precision } => match e {
                0 => Ok(PAdic::one(self.p, (*abs_precision).max(1) as u32)),
                e if e > 0 => Ok(PAdic::zero(self.p, abs_precision.saturating_mul(e))),
                _ => Err(Error::DivideByZero),
            },
            Repr::Nonzero { valuation, unit, precision } => {
                let m = pow_p(self.p, *precision);
                let mut u = unit.modpow(&BigInt::from(e.unsigned_abs()), &m);
                if e < 0 {
                    u = mod_inverse(&u, &m).expect("unit is invertible");
                }
                Ok(PAdic {
                    p: self.p,
                    repr: Repr::Nonzero { valuation: valuation * e, unit: u, precision: *precision },
                })
            }
        }
    }
}

/// Checked arithmetic entry point.
pub fn padic_arith(a: &PAdic, b: &PAdic, op: ArithOp) -> Result<PAdic> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Div => a.try_div(b),
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

impl Neg for &PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero { valuation, unit, precision } => PAdic {
                p: self.p,
                repr: Repr::Nonzero {
                    valuation: *valuation,
                    unit: (-unit).mod_floor(&pow_p(self.p, *precision)),
                    precision: *precision,
                },
            },
        }
    }
}

impl Neg for PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        -&self
    }
}

// Operator forms panic on a prime mismatch or a zero divisor; use
// `padic_arith` / `try_*` for the checked versions.
macro_rules! padic_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&PAdic> for &PAdic {
            type Output = PAdic;
            fn $method(self, rhs: &PAdic) -> PAdic {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<PAdic> for PAdic {
            type Output = PAdic;
            fn $method(self, rhs: PAdic) -> PAdic {
                (&self).$method(&rhs)
            }
        }
    };
}

padic_op!(Add, add, try_add);
padic_op!(Sub, sub, try_sub);
padic_op!(Mul, mul, try_mul);
padic_op!(Div, div, try_div);

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs_precision } => write!(f, "O({}^{})", self.p, abs_precision),
            Repr::Nonzero { valuation, unit, .. } => write!(
                f,
                "{}*{}^{} + O({}^{})",
                unit,
                self.p,
                valuation,
                self.p,
                self.abs_precision()
            ),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValuationWire {
    Finite(i64),
    Infinite(String),
}

#[derive(Serialize, Deserialize)]
struct PAdicWire {
    p: u64,
    valuation: ValuationWire,
    unit_digits: Vec<u64>,
    precision: i64,
}

impl Serialize for PAdic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match &self.repr {
            Repr::Zero { abs_precision } => PAdicWire {
                p: self.p,
                valuation: ValuationWire::Infinite("inf".into()),
                unit_digits: Vec::new(),
                precision: *abs_precision,
            },
            Repr::Nonzero { valuation, precision, .. } => PAdicWire {
                p: self.p,
                valuation: ValuationWire::Finite(*valuation),
                unit_digits: self.unit_digits(),
                precision: *precision as i64,
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PAdic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<PAdic, D::Error> {
        use serde::de::Error as _;
        let w = PAdicWire::deserialize(deserializer)?;
        match w.valuation {
            ValuationWire::Infinite(s) if s == "inf" => Ok(PAdic::zero(w.p, w.precision)),
            ValuationWire::Infinite(s) => Err(D::Error::custom(format!("bad valuation {s:?}"))),
            ValuationWire::Finite(v) => {
                if w.precision < 1 {
                    return Err(D::Error::custom("precision must be positive"));
                }
                let p = BigInt::from(w.p);
                let unit = w
                    .unit_digits
                    .iter()
                    .rev()
                    .fold(BigInt::zero(), |acc, d| acc * &p + BigInt::from(*d));
                if (&unit % &p).is_zero() {
                    return Err(D::Error::custom("unit digit 0 must be nonzero"));
                }
                Ok(PAdic::new(w.p, v, unit, w.precision as u32))
            }
        }
    }
}

impl PAdic {
    /// Rational representative `residue * p^min(v,0)`; used for reporting.
    pub fn approx_rat(&self) -> Rat {
        match &self.repr {
            Repr::Zero { .. } => Rat::zero(),
            Repr::Nonzero { valuation, unit, .. } => {
                let u = if unit.is_negative() { -unit } else { unit.clone() };
                Rat::from(u) * Rat::from(self.p as i64).pow(*valuation)
            }
        }
    }
}
