//! Weighted q-numbers, the fermionic q-measure on `Z_p`, and the fermionic
//! p-adic q-integral as a limit of level-`n` Riemann sums.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{PAdic, QContext, Rat, Scalar};

/// Extra digits carried by the p-adic backbone of the integral, on top of
/// the context precision and the level.
const INTEGRAL_GUARD_DIGITS: u32 = 4;

/// Points per parallel partition of a level sum.
const CHUNK: u64 = 1024;

/// `[x]_{Q^alpha} = (1 - Q^(alpha x)) / (1 - Q^alpha)` with `Q = q^base`.
pub fn q_number(q: &Scalar, alpha: u32, base: u32, x: i64) -> Result<Scalar> {
    match x {
        0 => return Ok(Scalar::zero()),
        1 => return Ok(Scalar::one()),
        _ => {}
    }
    let big_q = q.try_pow(base as i64)?;
    let qa = big_q.try_pow(alpha as i64)?;
    let den = Scalar::one().try_sub(&qa)?;
    if den.is_zero() {
        return Err(Error::DegenerateQ(format!("1 - q^{} vanishes", alpha * base)));
    }
    let num = Scalar::one().try_sub(&qa.try_pow(x)?)?;
    num.try_div(&den)
}

/// Weighted q-number `[x]_{q^(alpha*base)}` for the context's `q` and weight.
pub fn q_int(x: i64, ctx: &QContext, base: u32) -> Result<Scalar> {
    q_number(ctx.q(), ctx.alpha(), base, x)
}

/// `mu_q(a + p^n Z_p) = (-q)^a (1 + q) / (1 + q^(p^n))` for an arbitrary
/// `q` (including `q = 1`, where it is the plain fermionic measure).
pub fn measure_value_at(q: &Scalar, p: u64, a: u64, n: u32) -> Result<Scalar> {
    let size = p.checked_pow(n).ok_or_else(|| Error::OutOfRange(format!("{p}^{n} overflows")))?;
    if a >= size {
        return Err(Error::OutOfRange(format!("a = {a} not in [0, {size})")));
    }
    let minus_q = -q;
    let one = Scalar::one();
    let num = minus_q.try_pow(a as i64)?.try_mul(&one.try_add(q)?)?;
    let den = one.try_add(&q.try_pow(size as i64)?)?;
    num.try_div(&den)
}

/// Fermionic measure of `a + p^n Z_p` under the context's `q`.
pub fn measure_value(a: u64, n: u32, ctx: &QContext) -> Result<Scalar> {
    measure_value_at(ctx.q(), ctx.p()?, a, n)
}

/// A function on the sample points `0, 1, 2, ...` of `Z_p`, integrated
/// against `mu_{q^l}` where `l` is [`Integrand::measure_base`].
pub trait Integrand: Sync {
    /// Value at `a`, built from `q` in whatever representation the caller
    /// integrates in (exact or p-adic).
    fn eval(&self, a: u64, q: &Scalar) -> Result<Scalar>;

    fn measure_base(&self) -> u32 {
        1
    }
}

/// Closure-backed integrand.
pub struct FnIntegrand<F> {
    f: F,
    base: u32,
}

impl<F> FnIntegrand<F>
where
    F: Fn(u64, &Scalar) -> Result<Scalar> + Sync,
{
    pub fn new(base: u32, f: F) -> Self {
        assert!(base >= 1);
        FnIntegrand { f, base }
    }
}

impl<F> Integrand for FnIntegrand<F>
where
    F: Fn(u64, &Scalar) -> Result<Scalar> + Sync,
{
    fn eval(&self, a: u64, q: &Scalar) -> Result<Scalar> {
        (self.f)(a, q)
    }

    fn measure_base(&self) -> u32 {
        self.base
    }
}

/// `I_level(f) = (1 + Q)/(1 + Q^(p^level)) * sum_{a < p^level} f(a) (-Q)^a`
/// with `Q = q^l`. Partitions are summed in parallel and combined in index
/// order, so the result does not depend on the thread count.
fn level_sum(f: &dyn Integrand, q: &Scalar, p: u64, level: u32) -> Result<Scalar> {
    let size = p
        .checked_pow(level)
        .ok_or_else(|| Error::OutOfRange(format!("{p}^{level} overflows")))?;
    let big_q = q.try_pow(f.measure_base() as i64)?;
    let step = -&big_q;
    let chunks = size.div_ceil(CHUNK);
    let partial: Vec<Result<Scalar>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(size);
            let mut weight = step.try_pow(lo as i64)?;
            let mut acc = Scalar::zero();
            for a in lo..hi {
                acc = acc.try_add(&f.eval(a, q)?.try_mul(&weight)?)?;
                weight = weight.try_mul(&step)?;
            }
            Ok(acc)
        })
        .collect();
    let mut sum = Scalar::zero();
    for s in partial {
        sum = sum.try_add(&s?)?;
    }
    let one = Scalar::one();
    let factor = one.try_add(&big_q)?.try_div(&one.try_add(&big_q.try_pow(size as i64)?)?)?;
    sum.try_mul(&factor)
}

/// The level-`level` approximation evaluated on exact rationals.
/// Intended for small levels: exact values grow like `p^level` digits.
pub fn fermionic_integral_exact(f: &dyn Integrand, ctx: &QContext, level: u32) -> Result<Rat> {
    let p = ctx.require_padic("the fermionic integral")?;
    let q = ctx
        .q()
        .as_rat()
        .ok_or_else(|| Error::ModeError("exact integral needs a rational q".into()))?;
    match level_sum(f, &Scalar::Exact(q.clone()), p, level)? {
        Scalar::Exact(r) => Ok(r),
        Scalar::PAdic(_) => Err(Error::ModeError("integrand left the rationals".into())),
    }
}

/// Working digits used for the p-adic backbone at a given level.
pub fn integral_working_precision(ctx: &QContext, level: u32) -> u32 {
    ctx.precision() + level + INTEGRAL_GUARD_DIGITS
}

/// The level-`level` approximation `I_level(f)` in `Q_p`. The sum runs on a
/// p-adic backbone: `q` is embedded with
/// [`integral_working_precision`] digits and every term is reduced, which
/// is exact modulo the reported precision.
pub fn fermionic_integral(f: &dyn Integrand, ctx: &QContext, level: u32) -> Result<PAdic> {
    let p = ctx.require_padic("the fermionic integral")?;
    if level == 0 {
        return Err(Error::OutOfRange("level must be at least 1".into()));
    }
    integral_at_level(f, ctx, p, level)
}

fn integral_at_level(f: &dyn Integrand, ctx: &QContext, p: u64, level: u32) -> Result<PAdic> {
    let work = integral_working_precision(ctx, level);
    let q = Scalar::PAdic(ctx.q().to_padic(p, work)?);
    level_sum(f, &q, p, level)?.to_padic(p, work)
}

/// Smallest `n` with `p^n > 2^21`.
pub fn default_level_cap(p: u64) -> u32 {
    let mut n = 0;
    let mut size = 1u64;
    while size <= 1 << 21 {
        size *= p;
        n += 1;
    }
    n
}

/// Outcome of [`integral_adaptive`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralResult {
    pub value: PAdic,
    pub level_used: u32,
    /// Known valuation of `I_level - I_(level-1)`.
    pub last_delta_valuation: i64,
}

impl IntegralResult {
    /// `|I_level - I_(level-1)|_p`, as an upper bound when the delta is zero
    /// at its precision.
    pub fn last_delta_norm(&self) -> Rat {
        Rat::from(self.value.p() as i64).pow(-self.last_delta_valuation)
    }
}

/// Raises the level until `|I_level - I_(level-1)|_p <= p^(-target)`.
pub fn integral_adaptive(f: &dyn Integrand, ctx: &QContext, target: i64) -> Result<IntegralResult> {
    let p = ctx.require_padic("the fermionic integral")?;
    integral_adaptive_capped(f, ctx, target, default_level_cap(p))
}

pub fn integral_adaptive_capped(
    f: &dyn Integrand,
    ctx: &QContext,
    target: i64,
    cap: u32,
) -> Result<IntegralResult> {
    let p = ctx.require_padic("the fermionic integral")?;
    // I_0 is the single sample f(0).
    let work = integral_working_precision(ctx, 0);
    let mut prev = f.eval(0, &Scalar::PAdic(ctx.q().to_padic(p, work)?))?.to_padic(p, work)?;
    let mut last = i64::MIN;
    for level in 1..=cap {
        let value = integral_at_level(f, ctx, p, level)?;
        last = value.try_sub(&prev)?.valuation_bound();
        if last >= target {
            return Ok(IntegralResult { value, level_used: level, last_delta_valuation: last });
        }
        prev = value;
    }
    Err(Error::NoConvergence { level: cap, last_delta_valuation: last })
}
