//! p-adic interpolation of the weighted q-Genocchi polynomials and the
//! weighted q-Dedekind-type sums built from it.
//!
//! Two regimes coexist:
//!
//! * the integer-order form `A~(m, a, N)`, a finite sum that makes sense
//!   for every `N` and equals `[N]^m G~_{m+1, q^N}(a/N) / (m+1)`;
//! * the series form `A~(s, a, N)` for `s` in `Z_p`, which only converges
//!   when `p | N` (term `j` is divisible by `p^(j v_p(N))`).
//!
//! The finite sum uses `G~_{j+1}/(j+1)` in its summand. With
//! [`QContext::literal_mode`] the alternative summand
//! `q^(-alpha a) ... G~_j` is used instead so its disagreement can be
//! reported.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genocchi::{g_number_base, g_poly_at, g_poly_scaled};
use crate::qkernel::{fermionic_integral, q_int, FnIntegrand};
use crate::report::VerificationReport;
use crate::scalar::{
    binomial, padic_binomial, teichmuller, unit_power, Mode, PAdic, QContext, Rat, ResiduePolicy, Scalar,
};

/// Extra digits used when embedding exact series coefficients.
const SERIES_GUARD_DIGITS: u32 = 2;

/// Which summand the finite form of `A~` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Summand {
    Corrected,
    Printed,
}

impl Summand {
    fn of(ctx: &QContext) -> Summand {
        if ctx.literal_mode() {
            Summand::Printed
        } else {
            Summand::Corrected
        }
    }
}

fn check_unit(x: i64, p: u64) -> Result<()> {
    if x.rem_euclid(p as i64) == 0 {
        return Err(Error::NotAUnit(format!("{x} (p = {p})")));
    }
    Ok(())
}

/// Teichmüller representative of the integer `x` at `precision` digits.
pub fn teichmuller_int(x: i64, p: u64, precision: u32) -> Result<PAdic> {
    check_unit(x, p)?;
    teichmuller(&PAdic::from_int(x, p, precision))
}

fn angle_in_base(x: i64, ctx: &QContext, weighted: bool) -> Result<PAdic> {
    let p = ctx.require_padic("<x : q>")?;
    check_unit(x, p)?;
    let prec = ctx.precision();
    let w = teichmuller_int(x, p, prec)?;
    let bracket = if weighted {
        q_int(x, ctx, 1)?
    } else {
        q_int(x, &ctx.with_alpha(1), 1)?
    };
    bracket.to_padic(p, prec)?.try_div(&w)
}

/// `<x : q> = w^(-1)(x) [x]_q`, a 1-unit.
pub fn angle(x: i64, ctx: &QContext) -> Result<PAdic> {
    angle_in_base(x, ctx, false)
}

/// `<x : q^alpha> = w^(-1)(x) [x]_{q^alpha}`.
pub fn angle_weighted(x: i64, ctx: &QContext) -> Result<PAdic> {
    angle_in_base(x, ctx, true)
}

/// `w^(-(m+1))(a)`, or exactly 1 when `(p - 1) | (m + 1)`.
fn twist_factor(m: u64, a: i64, ctx: &QContext) -> Result<Option<PAdic>> {
    let p = ctx.require_padic("the Teichmüller twist")?;
    check_unit(a, p)?;
    if (m + 1) % (p - 1) == 0 {
        return Ok(None);
    }
    let w = teichmuller_int(a, p, ctx.precision())?;
    Ok(Some(w.pow(-(m as i64 + 1))?))
}

fn a_tilde_finite(m: u64, a: i64, big_n: u32, ctx: &QContext, summand: Summand) -> Result<Scalar> {
    if big_n == 0 {
        return Err(Error::OutOfRange("N must be positive".into()));
    }
    let alpha = ctx.alpha() as i64;
    let q = ctx.q();
    let bracket_a = q_int(a, ctx, 1)?;
    let bracket_n = q_int(big_n as i64, ctx, 1)?;
    let shift = q.try_pow(alpha * a)?;
    let mut sum = Scalar::zero();
    let mut shift_j = Scalar::one();
    let mut bracket_n_j = Scalar::one();
    for j in 0..=m {
        let g = match summand {
            Summand::Corrected => {
                g_number_base(j + 1, big_n, ctx)?.try_div(&Scalar::int(j as i64 + 1))?
            }
            Summand::Printed => g_number_base(j, big_n, ctx)?,
        };
        let term = Scalar::Exact(Rat::from(binomial(m, j)))
            .try_mul(&shift_j)?
            .try_mul(&bracket_a.try_pow((m - j) as i64)?)?
            .try_mul(&bracket_n_j)?
            .try_mul(&g)?;
        sum = sum.try_add(&term)?;
        shift_j = shift_j.try_mul(&shift)?;
        bracket_n_j = bracket_n_j.try_mul(&bracket_n)?;
    }
    match summand {
        Summand::Corrected => Ok(sum),
        Summand::Printed => q.try_pow(-alpha * a)?.try_mul(&sum),
    }
}

/// Integer-order interpolation value
/// `[a]^m sum_j C(m,j) q^(alpha a j) ([N]/[a])^j G~_{j+1, q^N}/(j+1)`,
/// which equals `[N]^m G~_{m+1, q^N}(a/N)/(m+1)`. With `twist` the value is
/// multiplied by `w^(-(m+1))(a)` (p-adic mode only).
pub fn a_tilde_integer(m: u64, a: i64, big_n: u32, ctx: &QContext, twist: bool) -> Result<Scalar> {
    if twist && ctx.mode() != Mode::Padic {
        return Err(Error::ModeError("the Teichmüller twist requires p-adic mode".into()));
    }
    let value = a_tilde_finite(m, a, big_n, ctx, Summand::of(ctx))?;
    if !twist {
        return Ok(value);
    }
    match twist_factor(m, a, ctx)? {
        None => Ok(value),
        Some(w) => value.try_mul(&Scalar::PAdic(w)),
    }
}

/// Integral representation
/// `[N]^m * I_level(q^(-N xi) [a/N + xi]_{q^(alpha N)}^m)` against `mu_{q^N}`.
pub fn a_tilde_integral(m: u64, a: i64, big_n: u32, ctx: &QContext, level: u32) -> Result<PAdic> {
    let p = ctx.require_padic("the integral form")?;
    let alpha = ctx.alpha() as i64;
    let n = big_n as i64;
    let f = FnIntegrand::new(big_n, move |xi, q: &Scalar| {
        let one = Scalar::one();
        let kernel = one
            .try_sub(&q.try_pow(alpha * (a + n * xi as i64))?)?
            .try_div(&one.try_sub(&q.try_pow(alpha * n)?)?)?;
        q.try_pow(-n * xi as i64)?.try_mul(&kernel.try_pow(m as i64)?)
    });
    let integral = fermionic_integral(&f, ctx, level)?;
    let scale = q_int(n, ctx, 1)?.try_pow(m as i64)?.to_padic(p, integral.precision().max(1))?;
    Ok(&scale * &integral)
}

/// Series form `w^(-1)(a) <a : q^alpha>^s sum_{j<=truncation} C(s,j)
/// q^(alpha a j) ([N]/[a])^j G~_{j+1, q^N}/(j+1)`, for `p | N`.
pub fn a_tilde_series(s: &PAdic, a: i64, big_n: u32, ctx: &QContext, truncation: u32) -> Result<PAdic> {
    let p = ctx.require_padic("the interpolation series")?;
    if s.p() != p {
        return Err(Error::PrimeMismatch(s.p(), p));
    }
    if big_n as u64 % p != 0 {
        return Err(Error::SeriesDivergence(big_n as u64));
    }
    check_unit(a, p)?;
    if truncation == 0 {
        return Err(Error::OutOfRange("truncation must be at least 1".into()));
    }
    let summand = Summand::of(ctx);
    let alpha = ctx.alpha() as i64;
    let q = ctx.q();
    let work = ctx.precision() + SERIES_GUARD_DIGITS;
    let v_n = Rat::from(big_n as i64).valuation(p).unwrap();
    let ratio = q_int(big_n as i64, ctx, 1)?.try_div(&q_int(a, ctx, 1)?)?;
    let shift = q.try_pow(alpha * a)?;

    let mut sum: Option<PAdic> = None;
    let mut coeff_power = Scalar::one();
    for j in 0..=truncation as u64 {
        let g = match summand {
            Summand::Corrected => {
                g_number_base(j + 1, big_n, ctx)?.try_div(&Scalar::int(j as i64 + 1))?
            }
            Summand::Printed => g_number_base(j, big_n, ctx)?,
        };
        let c = coeff_power.try_mul(&g)?.to_padic(p, work)?;
        if let Some(v) = c.valuation() {
            assert!(
                v >= j as i64 * v_n,
                "series term {j} has valuation {v} < {}",
                j as i64 * v_n
            );
        }
        let term = padic_binomial(s, j)?.try_mul(&c)?;
        sum = Some(match sum {
            None => term,
            Some(acc) => acc.try_add(&term)?,
        });
        coeff_power = coeff_power.try_mul(&shift)?.try_mul(&ratio)?;
    }
    let mut sum = sum.expect("at least one term");
    if summand == Summand::Printed {
        sum = q.try_pow(-alpha * a)?.to_padic(p, work)?.try_mul(&sum)?;
    }
    let w = teichmuller_int(a, p, work)?;
    let power = unit_power(&angle_weighted(a, ctx)?, s)?;
    power.try_div(&w)?.try_mul(&sum)
}

/// Parameters of the weighted q-Dedekind-type sum `Y~_m(h, k : q^l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YParams {
    pub m: u64,
    pub h: u64,
    pub k: u64,
    pub l: u64,
}

impl YParams {
    pub fn new(m: u64, h: u64, k: u64, l: u64) -> Result<YParams> {
        if h == 0 || k == 0 || l == 0 {
            return Err(Error::OutOfRange("h, k and l must be positive".into()));
        }
        if h.gcd(&k) != 1 {
            return Err(Error::NotCoprime(h, k));
        }
        if l % k != 0 {
            return Err(Error::BaseNotMultiple { k, l });
        }
        Ok(YParams { m, h, k, l })
    }
}

fn bracket_ratio(big_m: u64, k: u64, ctx: &QContext) -> Result<Scalar> {
    q_int(big_m as i64, ctx, 1)?.try_div(&q_int(k as i64, ctx, 1)?)
}

/// `Y~_m(h,k : q^l) = sum_M (-1)^(M-1) ([M]/[k]) G~_{m+1, q^l}({hM/k})/(m+1)`,
/// the integral over `mu_{q^l}` replaced by its closed form.
pub fn y_tilde(params: YParams, ctx: &QContext) -> Result<Scalar> {
    let YParams { m, h, k, l } = YParams::new(params.m, params.h, params.k, params.l)?;
    let mut acc = Scalar::zero();
    for big_m in 1..k {
        let r = (h * big_m) % k;
        let g = g_poly_scaled(m + 1, (l / k * r) as i64, l as u32, ctx)?.try_div(&Scalar::int(m as i64 + 1))?;
        let term = bracket_ratio(big_m, k, ctx)?.try_mul(&g)?;
        acc = if big_m % 2 == 1 { acc.try_add(&term)? } else { acc.try_sub(&term)? };
    }
    Ok(acc)
}

/// `Y~_m(h,k : q^l)` with each integral evaluated as a level-`level`
/// fermionic sum.
pub fn y_tilde_integral(params: YParams, ctx: &QContext, level: u32) -> Result<PAdic> {
    let YParams { m, h, k, l } = YParams::new(params.m, params.h, params.k, params.l)?;
    let p = ctx.require_padic("the integral form")?;
    let alpha = ctx.alpha() as i64;
    let mut acc = PAdic::zero(p, i64::MAX / 4);
    for big_m in 1..k {
        let shift = (l / k * ((h * big_m) % k)) as i64;
        let li = l as i64;
        let f = FnIntegrand::new(l as u32, move |xi, q: &Scalar| {
            let one = Scalar::one();
            let kernel = one
                .try_sub(&q.try_pow(alpha * (li * xi as i64 + shift))?)?
                .try_div(&one.try_sub(&q.try_pow(alpha * li)?)?)?;
            q.try_pow(-li * xi as i64)?.try_mul(&kernel.try_pow(m as i64)?)
        });
        let integral = fermionic_integral(&f, ctx, level)?;
        let weight = bracket_ratio(big_m, k, ctx)?.to_padic(p, integral.precision().max(1) + 2)?;
        let term = &weight * &integral;
        acc = if big_m % 2 == 1 { &acc + &term } else { &acc - &term };
    }
    Ok(acc)
}

/// Residues `(hM)_k` for `M = 1..k`, each tagged with `M`, after applying
/// the context's policy for residues divisible by `p`.
fn reduced_residues(h: u64, k: u64, ctx: &QContext) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::with_capacity(k as usize);
    for big_m in 1..k {
        let r = (h * big_m) % k;
        if let (Mode::Padic, Ok(p)) = (ctx.mode(), ctx.p()) {
            if r % p == 0 {
                match ctx.residue_policy() {
                    ResiduePolicy::Reject => return Err(Error::ResidueDivisibleByP { residue: r, p }),
                    ResiduePolicy::Skip => continue,
                }
            }
        }
        out.push((big_m, r));
    }
    Ok(out)
}

/// p-adic Dedekind-type sum `sum_M (-1)^(M-1) [M]_{q^alpha} A~(m, (hM)_k, k)`.
/// In p-adic mode the terms carry the Teichmüller twist and `p` must not
/// divide `k`.
pub fn dc_padic(m: u64, h: u64, k: u64, ctx: &QContext) -> Result<Scalar> {
    if h == 0 || k == 0 {
        return Err(Error::OutOfRange("h and k must be positive".into()));
    }
    if h.gcd(&k) != 1 {
        return Err(Error::NotCoprime(h, k));
    }
    let twist = ctx.mode() == Mode::Padic;
    if twist {
        let p = ctx.p()?;
        if k % p == 0 {
            return Err(Error::OutOfRange(format!("p = {p} divides k = {k}")));
        }
    }
    let mut acc = Scalar::zero();
    for (big_m, r) in reduced_residues(h, k, ctx)? {
        let term = q_int(big_m as i64, ctx, 1)?.try_mul(&a_tilde_integer(m, r as i64, k as u32, ctx, twist)?)?;
        acc = if big_m % 2 == 1 { acc.try_add(&term)? } else { acc.try_sub(&term)? };
    }
    Ok(acc)
}

fn with_ctx_params(report: VerificationReport, ctx: &QContext) -> VerificationReport {
    let r = report.param("q", ctx.q().to_string()).param("alpha", ctx.alpha());
    match ctx.p() {
        Ok(p) => r.param("p", p),
        Err(_) => r,
    }
}

/// Checks `[k]^(m+1) Y~_m(h,k : q^k) = sum_M (-1)^(M-1) [M] A~(m, (hM)_k, k)`
/// on the untwisted integer-order values.
pub fn check_eq7(m: u64, h: u64, k: u64, ctx: &QContext) -> Result<VerificationReport> {
    let bracket_k = q_int(k as i64, ctx, 1)?;
    let lhs = bracket_k.try_pow(m as i64 + 1)?.try_mul(&y_tilde(YParams::new(m, h, k, k)?, ctx)?)?;
    let mut rhs = Scalar::zero();
    for big_m in 1..k {
        let r = ((h * big_m) % k) as i64;
        let term = q_int(big_m as i64, ctx, 1)?.try_mul(&a_tilde_finite(m, r, k as u32, ctx, Summand::Corrected)?)?;
        rhs = if big_m % 2 == 1 { rhs.try_add(&term)? } else { rhs.try_sub(&term)? };
    }
    let residual = lhs.try_sub(&rhs)?;
    let tol = match residual {
        Scalar::Exact(_) => None,
        Scalar::PAdic(_) => Some(ctx.precision() as i64 - 2),
    };
    let r = VerificationReport::new("eq7", "[k]^(m+1) Y~_m(h,k:q^k) = sum (-1)^(M-1) [M] A~(m,(hM)_k,k)", residual, tol)
        .param("m", m)
        .param("h", h)
        .param("k", k);
    Ok(with_ctx_params(r, ctx))
}

/// Order argument of the descent check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Order {
    /// Finite-sum form at a nonnegative integer order (any `N`).
    Integer(u64),
    /// Series form at `s` in `Z_p` (needs `p | N`).
    Series(PAdic),
}

/// Checks the descent from level `N` to level `pN`:
/// `A~(s, a, N) = (1+q^N)/(1+q^(pN)) sum_{i: p !| a+iN} (-1)^i A~(s, a+iN, pN)`.
/// For the integer order the full sum over all `i` is the exact identity;
/// when `p !| N` the sum without the `p`-divisible class is reported in the
/// notes.
pub fn check_descent(
    order: &Order,
    a: i64,
    big_n: u32,
    ctx: &QContext,
    truncation: u32,
) -> Result<VerificationReport> {
    let p = ctx.require_padic("the descent identity")?;
    check_unit(a, p)?;
    if big_n == 0 {
        return Err(Error::OutOfRange("N must be positive".into()));
    }
    let q = ctx.q();
    let one = Scalar::one();
    let pn = big_n * p as u32;
    let factor = one
        .try_add(&q.try_pow(big_n as i64)?)?
        .try_div(&one.try_add(&q.try_pow(pn as i64)?)?)?;
    let shifted: Vec<(u64, i64)> = (0..p).map(|i| (i, a + i as i64 * big_n as i64)).collect();
    let divides_n = big_n as u64 % p == 0;

    let report = match order {
        Order::Integer(m) => {
            let m = *m;
            let lhs = a_tilde_finite(m, a, big_n, ctx, Summand::Corrected)?;
            let mut full = Scalar::zero();
            let mut excluded = Scalar::zero();
            for &(i, b) in &shifted {
                let t = a_tilde_finite(m, b, pn, ctx, Summand::Corrected)?;
                let t = if i % 2 == 0 { t } else { -t };
                if b.rem_euclid(p as i64) != 0 {
                    excluded = excluded.try_add(&t)?;
                }
                full = full.try_add(&t)?;
            }
            let residual = lhs.try_sub(&factor.try_mul(&full)?)?;
            let tol = match residual {
                Scalar::Exact(_) => None,
                Scalar::PAdic(_) => Some(ctx.precision() as i64 - 2),
            };
            let r = VerificationReport::new("descent", "A~(m,a,N) = (1+q^N)/(1+q^(pN)) sum_i (-1)^i A~(m,a+iN,pN)", residual, tol)
                .param("order", m);
            if divides_n {
                r.note("p | N: no index i has p | a+iN, the exclusion is vacuous")
            } else {
                let gap = lhs.try_sub(&factor.try_mul(&excluded)?)?;
                r.note(format!("sum without the p-divisible class differs by {gap}"))
            }
        }
        Order::Series(s) => {
            if !divides_n {
                return Err(Error::SeriesDivergence(big_n as u64));
            }
            let lhs = a_tilde_series(s, a, big_n, ctx, truncation)?;
            let mut rhs = PAdic::zero(p, i64::MAX / 4);
            for &(i, b) in &shifted {
                if b.rem_euclid(p as i64) == 0 {
                    continue;
                }
                let t = a_tilde_series(s, b, pn, ctx, truncation)?;
                rhs = if i % 2 == 0 { &rhs + &t } else { &rhs - &t };
            }
            let rhs = factor.to_padic(p, ctx.precision() + SERIES_GUARD_DIGITS)?.try_mul(&rhs)?;
            let residual = Scalar::PAdic(lhs.try_sub(&rhs)?);
            VerificationReport::new(
                "descent",
                "A~(s,a,N) = (1+q^N)/(1+q^(pN)) sum_{p !| a+iN} (-1)^i A~(s,a+iN,pN)",
                residual,
                Some(ctx.precision() as i64 - 2),
            )
            .param("s", s.to_string())
            .param("truncation", truncation)
            .note("p | N: no index i has p | a+iN, the exclusion is vacuous")
        }
    };
    Ok(with_ctx_params(report.param("a", a).param("N", big_n), ctx))
}

/// The three quantities compared by [`check_theorem21`].
#[derive(Clone, Debug)]
pub struct Theorem21Check {
    /// `sum_M (-1)^(M-1) [M] A~(m, (hM)_k, k)`.
    pub lhs: Scalar,
    /// `[k]^(m+1) Y~(h,k:q^k) - [k]^(m+1) ([kp]/[k]) Y~((p^-1 h)_k, k : q^(pk))`.
    pub compact_rhs: Scalar,
    /// Per-`M` split of each `A~(m, r, k)` into the classes `r + ik` prime
    /// to `p` and the single class divisible by `p`, summed back.
    pub decomposition: Scalar,
    /// The same sum with the `p`-divisible class removed.
    pub excluded: Scalar,
    /// Decomposition result plus informational residuals.
    pub reports: Vec<VerificationReport>,
}

fn valuation_label(x: &Scalar, p: u64) -> String {
    match x.valuation_bound(p) {
        i64::MAX => "inf".into(),
        v => v.to_string(),
    }
}

/// Multiplicative inverse of `x` modulo `m`.
pub fn inverse_mod(x: u64, m: u64) -> Option<u64> {
    let e = (x as i64).extended_gcd(&(m as i64));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i64) as u64)
}

/// Splits every `A~(m, (hM)_k, k)` along the residues mod `p` and compares
/// the pieces with the compact two-term formula.
///
/// With `r = (hM)_k` and `Q = q^k`:
/// `A~(m,r,k) = (1+Q)/(1+Q^p) sum_{i != i_M} (-1)^i A~(m, r+ik, pk)
///            + (1+Q)/(1+Q^p) (-1)^(i_M) [pk]^m G~_{m+1,q^(pk)}(t_M/k)/(m+1)`
/// where `i_M` is the index with `p | r + i_M k` and `t_M = (p^-1 r)_k`.
pub fn check_theorem21(m: u64, h: u64, k: u64, ctx: &QContext) -> Result<Theorem21Check> {
    let p = ctx.require_padic("the p-adic Dedekind sum")?;
    if (m + 1) % (p - 1) != 0 {
        return Err(Error::OutOfRange(format!("m + 1 = {} is not divisible by p - 1 = {}", m + 1, p - 1)));
    }
    if k % p == 0 {
        return Err(Error::OutOfRange(format!("p = {p} divides k = {k}")));
    }
    if h == 0 || k == 0 {
        return Err(Error::OutOfRange("h and k must be positive".into()));
    }
    if h.gcd(&k) != 1 {
        return Err(Error::NotCoprime(h, k));
    }
    let q = ctx.q();
    let one = Scalar::one();
    let pk = p * k;
    let unit_factor = one
        .try_add(&q.try_pow(k as i64)?)?
        .try_div(&one.try_add(&q.try_pow(pk as i64)?)?)?;
    let bracket_k = q_int(k as i64, ctx, 1)?;
    let bracket_pk = q_int(pk as i64, ctx, 1)?;
    let p_inv = inverse_mod(p % k.max(1), k).unwrap_or(0);
    let k_inv_mod_p = inverse_mod(k % p, p).expect("p does not divide k");

    let lhs = dc_padic(m, h, k, ctx)?;

    let mut decomposition = Scalar::zero();
    let mut excluded = Scalar::zero();
    for (big_m, r) in reduced_residues(h, k, ctx)? {
        let i_m = ((p - r % p) % p * k_inv_mod_p) % p;
        let mut nonbranch = Scalar::zero();
        for i in (0..p).filter(|&i| i != i_m) {
            let t = a_tilde_finite(m, (r + i * k) as i64, pk as u32, ctx, Summand::Corrected)?;
            nonbranch = if i % 2 == 0 { nonbranch.try_add(&t)? } else { nonbranch.try_sub(&t)? };
        }
        let nonbranch = unit_factor.try_mul(&nonbranch)?;
        let t_m = (p_inv * r) % k;
        debug_assert_eq!(p * t_m, r + i_m * k);
        let mut branch = bracket_pk
            .try_pow(m as i64)?
            .try_mul(&g_poly_at(m + 1, &Rat::new(t_m as i64, k as i64), pk as u32, ctx)?)?
            .try_div(&Scalar::int(m as i64 + 1))?
            .try_mul(&unit_factor)?;
        if i_m % 2 == 1 {
            branch = -branch;
        }
        let weight = q_int(big_m as i64, ctx, 1)?;
        let sign = if big_m % 2 == 1 { Scalar::one() } else { Scalar::int(-1) };
        let w = weight.try_mul(&sign)?;
        decomposition = decomposition.try_add(&w.try_mul(&nonbranch.try_add(&branch)?)?)?;
        excluded = excluded.try_add(&w.try_mul(&nonbranch)?)?;
    }

    let scale = bracket_k.try_pow(m as i64 + 1)?;
    let first = scale.try_mul(&y_tilde(YParams::new(m, h, k, k)?, ctx)?)?;
    let h_shifted = (p_inv * h) % k;
    let h_shifted = if k == 1 { 1 } else { h_shifted };
    let second = scale
        .try_mul(&bracket_pk.try_div(&bracket_k)?)?
        .try_mul(&y_tilde(YParams::new(m, h_shifted, k, pk)?, ctx)?)?;
    let compact_rhs = first.try_sub(&second)?;

    let tag = |r: VerificationReport| {
        with_ctx_params(r.param("m", m).param("h", h).param("k", k), ctx)
    };
    let decomposition_residual = lhs.try_sub(&decomposition)?;
    let tol = match decomposition_residual {
        Scalar::Exact(_) => None,
        Scalar::PAdic(_) => Some(ctx.precision() as i64 - 2),
    };
    let compact_gap = lhs.try_sub(&compact_rhs)?;
    let excluded_gap = excluded.try_sub(&compact_rhs)?;
    let reports = vec![
        tag(VerificationReport::new(
            "theorem21",
            "sum_M (-1)^(M-1) [M] A~(m,(hM)_k,k) split along residues mod p",
            decomposition_residual,
            tol,
        ))
        .note(format!("(p^-1 h)_k = {h_shifted}")),
        tag(VerificationReport::informational("theorem21", "compact two-term form: lhs - compact_rhs", compact_gap.clone()))
            .note("compact form omits (1+q^k)/(1+q^(pk)) and the branch signs (-1)^(i_M)")
            .note(format!("v_p = {}", valuation_label(&compact_gap, p))),
        tag(VerificationReport::informational(
            "theorem21",
            "sum without the p-divisible class - compact_rhs",
            excluded_gap.clone(),
        ))
        .note(format!("v_p = {}", valuation_label(&excluded_gap, p))),
    ];
    Ok(Theorem21Check { lhs, compact_rhs, decomposition, excluded, reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pctx(p: u64, q: i64, alpha: u32, prec: u32) -> QContext {
        QContext::padic(p, Rat::from(q), alpha, prec).unwrap()
    }

    #[test]
    fn angle_examples() {
        let ctx = pctx(5, 6, 1, 2);
        assert_eq!(angle(1, &ctx).unwrap(), PAdic::one(5, 2));
        assert_eq!(teichmuller_int(2, 5, 2).unwrap().inv().unwrap(), PAdic::from_int(18, 5, 2));
        assert!(angle(2, &ctx).unwrap().eq_at(&PAdic::one(5, 2), 1));
        assert_eq!(angle(2, &ctx).unwrap(), PAdic::from_int(126, 5, 2));
        assert!(matches!(angle(10, &ctx), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn a_tilde_integer_m0() {
        let ctx = QContext::rational(Rat::from(2), 1).unwrap();
        assert_eq!(a_tilde_integer(0, 1, 1, &ctx, false).unwrap(), Scalar::Exact(Rat::new(3, 2)));
        let lit = ctx.clone().with_literal_mode(true);
        assert_eq!(a_tilde_integer(0, 1, 1, &lit, false).unwrap(), Scalar::zero());
        assert!(matches!(a_tilde_integer(0, 1, 1, &ctx, true), Err(Error::ModeError(_))));
    }

    #[test]
    fn y_tilde_small() {
        let ctx = QContext::rational(Rat::from(2), 1).unwrap();
        assert_eq!(y_tilde(YParams::new(3, 1, 1, 1).unwrap(), &ctx).unwrap(), Scalar::zero());
        // m = 0: G~_1 does not depend on its argument.
        let q3 = Rat::from(8);
        let b1 = Rat::one();
        let b2 = Rat::from(3);
        let b3 = Rat::from(7);
        let expect = (Rat::one() + &q3) * (b1 - b2) / (Rat::from(2) * b3);
        assert_eq!(y_tilde(YParams::new(0, 1, 3, 3).unwrap(), &ctx).unwrap(), Scalar::Exact(expect));
        assert_eq!(YParams::new(1, 1, 3, 4), Err(Error::BaseNotMultiple { k: 3, l: 4 }));
        assert_eq!(YParams::new(1, 3, 3, 3), Err(Error::NotCoprime(3, 3)));
    }

    #[test]
    fn dc_padic_residue_policy() {
        let ctx = pctx(3, 4, 1, 8);
        // k = 4, h = 1: residues 1, 2, 3; 3 is divisible by p = 3.
        assert_eq!(dc_padic(1, 1, 4, &ctx), Err(Error::ResidueDivisibleByP { residue: 3, p: 3 }));
        let skip = ctx.with_residue_policy(ResiduePolicy::Skip);
        assert!(dc_padic(1, 1, 4, &skip).is_ok());
        assert!(matches!(dc_padic(1, 1, 3, &pctx(3, 4, 1, 8)), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn series_needs_p_dividing_n() {
        let ctx = pctx(5, 6, 1, 6);
        let s = PAdic::from_int(3, 5, 10);
        assert_eq!(a_tilde_series(&s, 1, 3, &ctx, 6), Err(Error::SeriesDivergence(3)));
        assert!(matches!(a_tilde_series(&s, 5, 5, &ctx, 6), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn inverse_mod_values() {
        assert_eq!(inverse_mod(7, 5), Some(3));
        assert_eq!(inverse_mod(2, 4), None);
    }

    #[test]
    fn theorem_decomposition_exact() {
        let ctx = pctx(7, 8, 1, 8);
        let check = check_theorem21(5, 1, 5, &ctx).unwrap();
        assert!(check.reports[0].pass, "{:?}", check.reports[0]);
        assert_eq!(check.lhs, check.decomposition);
        assert!(check.reports[0].notes.contains("(p^-1 h)_k = 3"));
        assert!(matches!(check_theorem21(4, 1, 5, &ctx), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn eq7_exact() {
        for (m, h, k) in [(1, 1, 3), (2, 2, 5), (3, 3, 4)] {
            let ctx = QContext::rational(Rat::new(3, 2), 2).unwrap();
            let r = check_eq7(m, h, k, &ctx).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn descent_integer_and_series() {
        let ctx = pctx(5, 6, 1, 8);
        for n in [1, 2, 5] {
            let r = check_descent(&Order::Integer(3), 1, n, &ctx, 8).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let ctx3 = pctx(3, 4, 1, 6);
        let s = PAdic::from_int(2, 3, 12);
        let r = check_descent(&Order::Series(s), 1, 3, &ctx3, 12).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn series_matches_integer_order() {
        let ctx = pctx(5, 6, 1, 6);
        let m = 3;
        let s = PAdic::from_int(m as i64, 5, 12);
        let series = a_tilde_series(&s, 2, 5, &ctx, 10).unwrap();
        let finite = a_tilde_integer(m, 2, 5, &ctx, true).unwrap().to_padic(5, 6).unwrap();
        assert!(series.eq_at(&finite, 6), "{series} vs {finite}");
    }

    #[test]
    fn integral_form_matches_finite_sum() {
        let ctx = pctx(5, 6, 1, 6);
        let v = a_tilde_integral(2, 1, 2, &ctx, 6).unwrap();
        let exact = a_tilde_integer(2, 1, 2, &ctx, false).unwrap().to_padic(5, 10).unwrap();
        assert!(v.eq_at(&exact, 5), "{v} vs {exact}");
    }
}
