//! Modified q-Genocchi numbers and polynomials with weight alpha.
//!
//! All functions index by the Genocchi order `n` itself, with
//! `G~_0 = 0`. A polynomial argument `x = a/N` is always evaluated in the
//! base-compensated form `G~_{n, q^N}(a/N)`, so every power of `q` that
//! appears has an integral exponent.

use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::qkernel::{fermionic_integral, q_number, FnIntegrand};
use crate::report::VerificationReport;
use crate::scalar::{binomial, PAdic, QContext, Rat, Scalar};

/// Classical Genocchi numbers `G_0..=G_n_max` from
/// `2 G_n = 2 [n = 1] - sum_{k<n} C(n,k) G_k`.
pub fn classical_genocchi_table(n_max: u64) -> Vec<Rat> {
    let mut g: Vec<Rat> = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let mut rhs = if n == 1 { Rat::from(2) } else { Rat::zero() };
        for (k, gk) in g.iter().enumerate() {
            rhs -= Rat::from(binomial(n, k as u64)) * gk;
        }
        g.push(rhs / Rat::from(2));
    }
    g
}

pub fn classical_genocchi(n: u64) -> Rat {
    classical_genocchi_table(n).pop().unwrap()
}

/// Closed form `G~_{n, Q}(a/N)` with `Q = q^base`:
/// `n (1+Q)/(1-Q^alpha)^(n-1) sum_l C(n-1,l) (-1)^l q^(alpha l a)/(1+Q^(alpha l))`.
fn g_closed(n: u64, a: i64, base: u32, q: &Scalar, alpha: u32) -> Result<Scalar> {
    if n == 0 {
        return Ok(Scalar::zero());
    }
    let one = Scalar::one();
    let big_q = q.try_pow(base as i64)?;
    let qa = big_q.try_pow(alpha as i64)?;
    let den = one.try_sub(&qa)?;
    let lead = one.try_add(&big_q)?;
    if den.is_zero() || lead.is_zero() {
        return Err(Error::DegenerateQ(format!("q^{base} = {big_q} makes a denominator vanish")));
    }
    let shift = q.try_pow(alpha as i64 * a)?;
    let mut shift_l = Scalar::one();
    let mut qa_l = Scalar::one();
    let mut sum = Scalar::zero();
    for l in 0..n {
        let d = one.try_add(&qa_l)?;
        if d.is_zero() {
            return Err(Error::DegenerateQ(format!("1 + q^{} vanishes", alpha as u64 * base as u64 * l)));
        }
        let mut c = Scalar::Exact(Rat::from(binomial(n - 1, l)));
        if l % 2 == 1 {
            c = -c;
        }
        sum = sum.try_add(&c.try_mul(&shift_l)?.try_div(&d)?)?;
        shift_l = shift_l.try_mul(&shift)?;
        qa_l = qa_l.try_mul(&qa)?;
    }
    Scalar::int(n as i64).try_mul(&lead)?.try_mul(&sum)?.try_div(&den.try_pow(n as i64 - 1)?)
}

type CacheKey = (u32, u32, String);

/// Append-only table of `G~_{n, q^N}^(alpha)` per `(N, alpha, q)`.
#[derive(Default)]
pub struct GenocchiCache {
    tables: RwLock<HashMap<CacheKey, Vec<Scalar>>>,
}

impl GenocchiCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(base: u32, ctx: &QContext) -> CacheKey {
        let q = serde_json::to_string(ctx.q()).expect("q serializes");
        (base, ctx.alpha(), q)
    }

    /// `G~_{n, q^base}`, filling the table up to `n` on a miss.
    pub fn get(&self, n: u64, base: u32, ctx: &QContext) -> Result<Scalar> {
        let key = Self::key(base, ctx);
        if let Some(v) = self.tables.read().unwrap().get(&key).and_then(|t| t.get(n as usize)) {
            return Ok(v.clone());
        }
        let mut tables = self.tables.write().unwrap();
        let table = tables.entry(key).or_default();
        while table.len() <= n as usize {
            let k = table.len() as u64;
            table.push(g_closed(k, 0, base, ctx.q(), ctx.alpha())?);
        }
        Ok(table[n as usize].clone())
    }

    pub fn len(&self, base: u32, ctx: &QContext) -> usize {
        self.tables.read().unwrap().get(&Self::key(base, ctx)).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.tables.read().unwrap().is_empty()
    }
}

static CACHE: LazyLock<GenocchiCache> = LazyLock::new(GenocchiCache::new);

/// Shared process-wide cache used by [`g_number`] and [`g_number_base`].
pub fn global_cache() -> &'static GenocchiCache {
    &CACHE
}

/// `G~_{n, q}^(alpha)`.
pub fn g_number(n: u64, ctx: &QContext) -> Result<Scalar> {
    g_number_base(n, 1, ctx)
}

/// `G~_{n, q^base}^(alpha)`.
pub fn g_number_base(n: u64, base: u32, ctx: &QContext) -> Result<Scalar> {
    CACHE.get(n, base, ctx)
}

/// `G~_{n, q^N}^(alpha)(a/N)`.
pub fn g_poly_scaled(n: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<Scalar> {
    if big_n == 0 {
        return Err(Error::OutOfRange("N must be positive".into()));
    }
    if a == 0 {
        return g_number_base(n, big_n, ctx);
    }
    g_closed(n, a, big_n, ctx.q(), ctx.alpha())
}

/// `G~_{n, q^base}^(alpha)(x)` for rational `x` with `base * x` integral.
pub fn g_poly_at(n: u64, x: &Rat, base: u32, ctx: &QContext) -> Result<Scalar> {
    let scaled = x * &Rat::from(base as i64);
    if !scaled.is_integer() {
        return Err(Error::FractionalExponent(format!("{base} * {x}")));
    }
    let a = scaled
        .numer()
        .to_i64()
        .ok_or_else(|| Error::OutOfRange(format!("argument {x} too large")))?;
    g_poly_scaled(n, a, base, ctx)
}

/// `n * I_level(q^(-beta xi) [xi]_{q^alpha}^(n-1))` against `mu_{q^beta}`.
pub fn g_number_ab_integral(n: u64, beta: u32, ctx: &QContext, level: u32) -> Result<PAdic> {
    let p = ctx.require_padic("the integral form")?;
    if beta == 0 {
        return Err(Error::OutOfRange("beta must be positive".into()));
    }
    if n == 0 {
        return Ok(PAdic::zero(p, ctx.precision() as i64));
    }
    let alpha = ctx.alpha();
    let f = FnIntegrand::new(beta, move |xi, q: &Scalar| {
        let kernel = q_number(q, alpha, 1, xi as i64)?.try_pow(n as i64 - 1)?;
        q.try_pow(-(beta as i64) * xi as i64)?.try_mul(&kernel)
    });
    let integral = fermionic_integral(&f, ctx, level)?;
    Ok(&PAdic::embed_like(&Rat::from(n as i64), &integral) * &integral)
}

/// `n * I_level(q^(-xi) [xi]_{q^alpha}^(n-1))` against `mu_q`.
pub fn g_number_integral(n: u64, ctx: &QContext, level: u32) -> Result<PAdic> {
    g_number_ab_integral(n, 1, ctx, level)
}

fn context_params(report: VerificationReport, ctx: &QContext) -> VerificationReport {
    let r = report.param("q", ctx.q().to_string()).param("alpha", ctx.alpha());
    match ctx.p() {
        Ok(p) => r.param("p", p),
        Err(_) => r,
    }
}

fn tolerance(ctx: &QContext, residual: &Scalar) -> Option<i64> {
    match residual {
        Scalar::Exact(_) => None,
        Scalar::PAdic(_) => Some(ctx.precision() as i64 - 2),
    }
}

/// Right side of the addition theorem
/// `G~_n(x) = q^(-alpha x) sum_l C(n,l) q^(alpha l x) G~_l [x]^(n-l)` at
/// `x = a/N`, base `q^N`.
pub fn identity5_rhs(n: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<Scalar> {
    let alpha = ctx.alpha() as i64;
    let q = ctx.q();
    let one = Scalar::one();
    // [x]_{Q^alpha} at x = a/N equals (1 - q^(alpha a)) / (1 - q^(alpha N)).
    let ratio = one
        .try_sub(&q.try_pow(alpha * a)?)?
        .try_div(&one.try_sub(&q.try_pow(alpha * big_n as i64)?)?)?;
    let mut sum = Scalar::zero();
    for l in 0..=n {
        let c = Scalar::Exact(Rat::from(binomial(n, l)));
        let term = c
            .try_mul(&q.try_pow(alpha * l as i64 * a)?)?
            .try_mul(&g_number_base(l, big_n, ctx)?)?
            .try_mul(&ratio.try_pow((n - l) as i64)?)?;
        sum = sum.try_add(&term)?;
    }
    q.try_pow(-alpha * a)?.try_mul(&sum)
}

/// Checks the addition theorem for `G~_{n, q^N}(a/N)` against the closed
/// form of the polynomial.
pub fn check_identity5(n: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<VerificationReport> {
    let lhs = g_poly_scaled(n, a, big_n, ctx)?;
    let rhs = identity5_rhs(n, a, big_n, ctx)?;
    let residual = lhs.try_sub(&rhs)?;
    let tol = tolerance(ctx, &residual);
    let r = VerificationReport::new("identity5", "addition theorem for G~_n(x)", residual, tol)
        .param("n", n)
        .param("a", a)
        .param("N", big_n);
    Ok(context_params(r, ctx))
}

/// Right side of the distribution relation at `x = a/N` with `Q = q^N`,
/// taking the polynomials on the right in base `Q^d`:
/// `(1+Q)/(1+Q^d) [d]_{Q^alpha}^(n-1) sum_i (-1)^i G~_{n, Q^d}(x + i/d)`.
pub fn distribution_rhs(n: u64, d: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<Scalar> {
    distribution_rhs_in_base(n, d, a, big_n, big_n * d as u32, ctx)
}

/// Same sum with the right-hand polynomials taken in base `Q` instead of
/// `Q^d`; only evaluable when every `N (x + i/d)` is integral.
pub fn distribution_rhs_literal(n: u64, d: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<Scalar> {
    distribution_rhs_in_base(n, d, a, big_n, big_n, ctx)
}

fn distribution_rhs_in_base(
    n: u64,
    d: u64,
    a: i64,
    big_n: u32,
    rhs_base: u32,
    ctx: &QContext,
) -> Result<Scalar> {
    if d % 2 == 0 {
        return Err(Error::EvenModulus(d));
    }
    if n == 0 {
        return Ok(Scalar::zero());
    }
    let q = ctx.q();
    let one = Scalar::one();
    let big_q = q.try_pow(big_n as i64)?;
    let prefactor = one
        .try_add(&big_q)?
        .try_div(&one.try_add(&big_q.try_pow(d as i64)?)?)?
        .try_mul(&q_number(q, ctx.alpha(), big_n, d as i64)?.try_pow(n as i64 - 1)?)?;
    let x = Rat::new(a, big_n as i64);
    let mut sum = Scalar::zero();
    for i in 0..d {
        let arg = &x + &Rat::new(i as i64, d as i64);
        let g = g_poly_at(n, &arg, rhs_base, ctx)?;
        sum = if i % 2 == 0 { sum.try_add(&g)? } else { sum.try_sub(&g)? };
    }
    prefactor.try_mul(&sum)
}

/// Checks `G~_{n,Q}(d x) = (1+Q)/(1+Q^d) [d]^(n-1) sum_i (-1)^i G~_{n,Q^d}(x + i/d)`
/// at `x = a/N`, `Q = q^N`, for odd `d`.
pub fn check_distribution(n: u64, d: u64, a: i64, big_n: u32, ctx: &QContext) -> Result<VerificationReport> {
    if d % 2 == 0 {
        return Err(Error::EvenModulus(d));
    }
    let lhs = g_poly_scaled(n, d as i64 * a, big_n, ctx)?;
    let rhs = distribution_rhs(n, d, a, big_n, ctx)?;
    let residual = lhs.try_sub(&rhs)?;
    let tol = tolerance(ctx, &residual);
    let mut r = VerificationReport::new("distribution6", "distribution relation, right side in base q^(dN)", residual, tol)
        .param("n", n)
        .param("d", d)
        .param("a", a)
        .param("N", big_n);
    match literal_distribution_residual(n, d, a, big_n, ctx)? {
        Some(lit) => r = r.note(format!("right side in base q^N instead: residual {lit}")),
        None => r = r.note("right side in base q^N not evaluable (fractional exponent)"),
    }
    Ok(context_params(r, ctx))
}

/// Residual of the distribution relation with the right side in base
/// `q^N`, or `None` when that form needs fractional powers of `q`.
pub fn literal_distribution_residual(
    n: u64,
    d: u64,
    a: i64,
    big_n: u32,
    ctx: &QContext,
) -> Result<Option<Scalar>> {
    let lhs = g_poly_scaled(n, d as i64 * a, big_n, ctx)?;
    match distribution_rhs_literal(n, d, a, big_n, ctx) {
        Ok(rhs) => Ok(Some(lhs.try_sub(&rhs)?)),
        Err(Error::FractionalExponent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `v_p(G~_n - G_n)`: how close the q-number is to its classical limit.
pub fn classical_limit_valuation(n: u64, ctx: &QContext) -> Result<i64> {
    let p = ctx.require_padic("the classical limit")?;
    let diff = g_number(n, ctx)?.try_sub(&Scalar::Exact(classical_genocchi(n)))?;
    Ok(diff.valuation_bound(p))
}
