//! Verification suites: parameter grids over the identities of every module,
//! each producing a list of [`VerificationReport`]s.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dedekind::{dc_sum, euler_poly, DCSumParams};
use crate::error::{Error, Result};
use crate::genocchi::{
    check_distribution, check_identity5, classical_genocchi, g_number, g_number_integral,
    literal_distribution_residual,
};
use crate::interp::{check_descent, check_eq7, check_theorem21, Order};
use crate::qkernel::{fermionic_integral_exact, measure_value_at, FnIntegrand};
use crate::report::VerificationReport;
use crate::scalar::{is_odd_prime, PAdic, QContext, Rat, ResiduePolicy, Scalar, DEFAULT_PRECISION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Dcsum,
    Descent,
    Distribution6,
    Eq7,
    Identity5,
    Integral,
    LimitQ1,
    Measure,
    Theorem21,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Dcsum,
        Suite::Descent,
        Suite::Distribution6,
        Suite::Eq7,
        Suite::Identity5,
        Suite::Integral,
        Suite::LimitQ1,
        Suite::Measure,
        Suite::Theorem21,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dcsum => "dcsum",
            Suite::Descent => "descent",
            Suite::Distribution6 => "distribution6",
            Suite::Eq7 => "eq7",
            Suite::Identity5 => "identity5",
            Suite::Integral => "integral",
            Suite::LimitQ1 => "limit_q1",
            Suite::Measure => "measure",
            Suite::Theorem21 => "theorem21",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Parses a comma-separated suite list; `all` selects every suite.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(item.parse()?);
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("no suite selected".into()));
    }
    Ok(out)
}

/// Knobs shared by the suites. The default grids do not depend on them
/// except where noted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Seed for the sampled extra points of the exact suites.
    pub seed: u64,
    /// Number of sampled points added to each exact suite.
    pub samples: usize,
    /// Prime and modulus for the theorem suite.
    pub theorem_p: u64,
    pub theorem_k: u64,
    /// Working precision of the p-adic suites.
    pub precision: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, samples: 4, theorem_p: 7, theorem_k: 5, precision: DEFAULT_PRECISION }
    }
}

fn rctx(q: &Rat, alpha: u32) -> QContext {
    QContext::rational(q.clone(), alpha).expect("grid q is admissible")
}

fn pctx(p: u64, q: Rat, alpha: u32, precision: u32) -> QContext {
    QContext::padic(p, q, alpha, precision).expect("grid q is admissible")
}

fn grid_qs() -> [Rat; 2] {
    [Rat::from(2), Rat::new(2, 3)]
}

fn or_error(suite: Suite, identity: &str, r: Result<VerificationReport>) -> VerificationReport {
    r.unwrap_or_else(|e| VerificationReport::error(suite.name(), identity, &e))
}

fn rng_for(cfg: &VerifyConfig, suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ ((suite as u64 + 1) << 56))
}

/// A small random rational away from `0` and `+-1`.
fn sample_q(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=7);
        let q = Rat::new(num, den);
        if !q.is_zero() && !q.is_one() && !(-&q).is_one() {
            return q;
        }
    }
}

/// Runs one suite. Failures to evaluate become failing reports.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<VerificationReport> {
    match suite {
        Suite::Dcsum => dcsum_suite(),
        Suite::Descent => descent_suite(cfg),
        Suite::Distribution6 => distribution_suite(cfg),
        Suite::Eq7 => eq7_suite(cfg),
        Suite::Identity5 => identity5_suite(cfg),
        Suite::Integral => integral_suite(cfg),
        Suite::LimitQ1 => limit_suite(cfg),
        Suite::Measure => measure_suite(),
        Suite::Theorem21 => theorem_suite(cfg),
    }
}

/// Runs the suites in parallel and returns the reports ordered by suite
/// name, then grid order.
pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let mut sorted = suites.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted
        .par_iter()
        .map(|&s| run_suite(s, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn identity5_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let mut points = Vec::new();
    for q in grid_qs() {
        for alpha in 1..=3 {
            for big_n in 1..=2u32 {
                for a in 0..=3i64 {
                    for n in 0..=8u64 {
                        points.push((n, a, big_n, q.clone(), alpha, false));
                    }
                }
            }
        }
    }
    let mut rng = rng_for(cfg, Suite::Identity5);
    for _ in 0..cfg.samples {
        let n = rng.gen_range(0..=8);
        let big_n = rng.gen_range(1..=4);
        let a = rng.gen_range(0..=2 * big_n as i64);
        points.push((n, a, big_n, sample_q(&mut rng), rng.gen_range(1..=3), true));
    }
    points
        .into_par_iter()
        .map(|(n, a, big_n, q, alpha, sampled)| {
            let r = or_error(Suite::Identity5, "addition theorem", check_identity5(n, a, big_n, &rctx(&q, alpha)));
            if sampled { r.param("sampled", true) } else { r }
        })
        .collect()
}

fn distribution_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let mut points = Vec::new();
    for q in grid_qs() {
        for alpha in 1..=2 {
            for d in [1u64, 3, 5] {
                for (a, big_n) in [(0i64, 1u32), (1, d as u32)] {
                    for n in 0..=6u64 {
                        points.push((n, d, a, big_n, q.clone(), alpha, false));
                    }
                }
            }
        }
    }
    let mut rng = rng_for(cfg, Suite::Distribution6);
    for _ in 0..cfg.samples {
        let d = [1u64, 3, 5, 7][rng.gen_range(0..4)];
        let big_n = rng.gen_range(1..=3);
        let a = rng.gen_range(0..=big_n as i64);
        points.push((rng.gen_range(0..=6), d, a, big_n, sample_q(&mut rng), rng.gen_range(1..=2), true));
    }
    points
        .into_par_iter()
        .flat_map_iter(|(n, d, a, big_n, q, alpha, sampled)| {
            let ctx = rctx(&q, alpha);
            let main = or_error(Suite::Distribution6, "distribution relation", check_distribution(n, d, a, big_n, &ctx));
            let main = if sampled { main.param("sampled", true) } else { main };
            let mut out = vec![main];
            if let Ok(Some(lit)) = literal_distribution_residual(n, d, a, big_n, &ctx) {
                out.push(
                    VerificationReport::informational(
                        "distribution6",
                        "distribution relation, right side in base q^N",
                        lit,
                    )
                    .param("n", n)
                    .param("d", d)
                    .param("a", a)
                    .param("N", big_n)
                    .param("q", q.to_string())
                    .param("alpha", alpha),
                );
            }
            out
        })
        .collect()
}

fn measure_suite() -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for p in [3u64, 5] {
        for n in 1..=2u32 {
            for q in grid_qs() {
                out.push(measure_identities(p, n, &q));
            }
        }
        let q = Rat::from(1 + p as i64);
        let ctx = pctx(p, q.clone(), 1, DEFAULT_PRECISION);
        let one = FnIntegrand::new(1, |_, _| Ok(Scalar::one()));
        for level in 1..=4 {
            let r = fermionic_integral_exact(&one, &ctx, level)
                .map(|v| VerificationReport::new("measure", "I_level(1) = 1", Scalar::Exact(v - Rat::one()), None));
            out.push(
                or_error(Suite::Measure, "I_level(1) = 1", r)
                    .param("p", p)
                    .param("level", level)
                    .param("q", q.to_string()),
            );
        }
    }
    out
}

/// Total mass and one-step additivity of the measure at level `n`.
fn measure_identities(p: u64, n: u32, q: &Rat) -> VerificationReport {
    let qs = Scalar::Exact(q.clone());
    let eval = || -> Result<(Scalar, Scalar)> {
        let size = p.pow(n);
        let mut total = Scalar::zero();
        let mut additivity = Scalar::zero();
        for a in 0..size {
            let m = measure_value_at(&qs, p, a, n)?;
            total = total.try_add(&m)?;
            let mut split = Scalar::zero();
            for b in 0..p {
                split = split.try_add(&measure_value_at(&qs, p, a + b * size, n + 1)?)?;
            }
            let gap = m.try_sub(&split)?;
            if additivity.is_zero() && !gap.is_zero() {
                additivity = gap;
            }
        }
        Ok((total.try_sub(&Scalar::one())?, additivity))
    };
    let r = match eval() {
        Ok((mass, additivity)) => VerificationReport::new("measure", "total mass and additivity", mass, None)
            .require(additivity.is_zero(), &format!("additivity gap {additivity}")),
        Err(e) => VerificationReport::error("measure", "total mass and additivity", &e),
    };
    r.param("p", p).param("n", n).param("q", q.to_string())
}

fn integral_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let p = 5;
    let q = Rat::from(6);
    let ctx = pctx(p, q.clone(), 1, cfg.precision);
    (0..=4u64)
        .into_par_iter()
        .map(|n| {
            let eval = || -> Result<VerificationReport> {
                let levels: Vec<PAdic> = (1..=6).map(|l| g_number_integral(n, &ctx, l)).collect::<Result<_>>()?;
                let deltas: Vec<i64> = levels
                    .windows(2)
                    .map(|w| w[1].try_sub(&w[0]).map(|d| d.valuation_bound()))
                    .collect::<Result<_>>()?;
                let closed = g_number(n, &ctx)?.to_padic(p, cfg.precision + 6)?;
                let residual = closed.try_sub(&levels[5])?;
                let monotone = deltas.windows(2).all(|w| w[1] >= w[0]);
                Ok(VerificationReport::new(
                    "integral",
                    "G~_n = n I_6(q^(-xi) [xi]^(n-1))",
                    Scalar::PAdic(residual),
                    Some(4),
                )
                .require(monotone, "level deltas nonincreasing in norm")
                .note(format!("delta valuations over levels 2..6: {deltas:?}")))
            };
            or_error(Suite::Integral, "G~_n = n I_6(q^(-xi) [xi]^(n-1))", eval())
                .param("n", n)
                .param("p", p)
                .param("q", q.to_string())
                .param("level", 6)
        })
        .collect()
}

fn limit_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let p = 5u64;
    let mut out = Vec::new();
    for n in 0..=6u64 {
        let mut prev: Option<i64> = None;
        for big_l in [2u32, 4, 6] {
            let q = Rat::from(1 + 5i64.pow(big_l));
            let ctx = pctx(p, q.clone(), 1, cfg.precision);
            let mut eval = || -> Result<VerificationReport> {
                let diff = g_number(n, &ctx)?.try_sub(&Scalar::Exact(classical_genocchi(n)))?;
                let residual = diff.to_padic(p, cfg.precision)?;
                let v = residual.valuation_bound();
                let monotone = prev.is_none_or(|pv| v >= pv);
                prev = Some(v);
                Ok(VerificationReport::new("limit_q1", "G~_n -> G_n as q -> 1", Scalar::PAdic(residual), Some(big_l as i64 - 2))
                    .require(monotone, "error nonincreasing in L"))
            };
            out.push(
                or_error(Suite::LimitQ1, "G~_n -> G_n as q -> 1", eval())
                    .param("n", n)
                    .param("p", p)
                    .param("L", big_l)
                    .param("q", q.to_string()),
            );
        }
    }
    out
}

fn eq7_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let mut points = Vec::new();
    for q in grid_qs() {
        for alpha in 1..=3 {
            for k in [3u64, 5] {
                for h in (1..k).filter(|h| h.gcd(&k) == 1) {
                    for m in 0..=6u64 {
                        points.push((m, h, k, rctx(&q, alpha), false));
                    }
                }
            }
        }
    }
    for (h, k) in [(1, 1), (2, 5)] {
        points.push((5, h, k, pctx(7, Rat::from(8), 1, cfg.precision), false));
    }
    let mut rng = rng_for(cfg, Suite::Eq7);
    for _ in 0..cfg.samples {
        let k = rng.gen_range(2..=7u64);
        let h = loop {
            let h = rng.gen_range(1..=2 * k);
            if h.gcd(&k) == 1 {
                break h;
            }
        };
        let q = sample_q(&mut rng);
        points.push((rng.gen_range(0..=6), h, k, rctx(&q, rng.gen_range(1..=3)), true));
    }
    points
        .into_par_iter()
        .map(|(m, h, k, ctx, sampled)| {
            let r = or_error(Suite::Eq7, "[k]^(m+1) Y~ = sum [M] A~", check_eq7(m, h, k, &ctx));
            if sampled { r.param("sampled", true) } else { r }
        })
        .collect()
}

fn descent_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let mut points = Vec::new();
    for p in [3u64, 5] {
        for m in [2u64, 3] {
            for big_n in [p as u32, 1, 2] {
                points.push((p, m, big_n, false));
            }
            points.push((p, m, p as u32, true));
        }
    }
    points
        .into_par_iter()
        .map(|(p, m, big_n, series)| {
            let ctx = pctx(p, Rat::from(1 + p as i64), 1, cfg.precision);
            let order = if series {
                Order::Series(PAdic::from_int(m as i64, p, cfg.precision + 4))
            } else {
                Order::Integer(m)
            };
            let r = check_descent(&order, 1, big_n, &ctx, cfg.precision + 4);
            or_error(Suite::Descent, "descent from N to pN", r)
        })
        .collect()
}

fn theorem_suite(cfg: &VerifyConfig) -> Vec<VerificationReport> {
    let p = cfg.theorem_p;
    let k = cfg.theorem_k;
    let identity = "sum_M (-1)^(M-1) [M] A~(m,(hM)_k,k) split along residues mod p";
    if !is_odd_prime(p) || k == 0 || k % p == 0 {
        let e = Error::Config(format!("theorem suite needs an odd prime p not dividing k (p = {p}, k = {k})"));
        return vec![VerificationReport::error("theorem21", identity, &e).param("p", p).param("k", k)];
    }
    let m = p - 2;
    let hs: Vec<u64> = (1..k.max(2)).filter(|h| h.gcd(&k) == 1).take(2).collect();
    let mut points = Vec::new();
    for alpha in 1..=2 {
        for &h in &hs {
            points.push((h, alpha));
        }
    }
    points
        .into_par_iter()
        .flat_map_iter(|(h, alpha)| {
            let ctx = pctx(p, Rat::from(1 + p as i64), alpha, cfg.precision)
                .with_residue_policy(ResiduePolicy::Skip);
            match check_theorem21(m, h, k, &ctx) {
                Ok(c) => c.reports,
                Err(e) => vec![VerificationReport::error("theorem21", identity, &e)
                    .param("m", m)
                    .param("h", h)
                    .param("k", k)],
            }
        })
        .collect()
}

/// Direct evaluation of `S_m(h,k)` from the floor/fractional split.
fn dc_sum_direct(m: u64, h: u64, k: u64) -> Rat {
    let mut acc = Rat::zero();
    for big_m in 1..k {
        let hm = h * big_m;
        let frac = Rat::new((hm % k) as i64, k as i64);
        let sign = if (hm / k) % 2 == 0 { 1 } else { -1 };
        let term = Rat::new(big_m as i64 * sign, k as i64) * euler_poly(m, &frac);
        acc = if big_m % 2 == 1 { acc + term } else { acc - term };
    }
    acc
}

fn dcsum_suite() -> Vec<VerificationReport> {
    let mut cases: Vec<(u64, u64, u64, Option<Rat>)> =
        vec![(1, 1, 3, Some(Rat::new(-1, 6))), (1, 1, 2, Some(Rat::zero()))];
    for m in 0..=6 {
        cases.push((m, 1 + m, 1, Some(Rat::zero())));
    }
    for m in 0..=5 {
        for k in [3u64, 4, 5, 7] {
            for h in (1..2 * k).filter(|h| h.gcd(&k) == 1) {
                cases.push((m, h, k, None));
            }
        }
    }
    cases
        .into_iter()
        .map(|(m, h, k, known)| {
            let r = DCSumParams::new(m, h, k).and_then(dc_sum).map(|v| {
                let oracle = known.unwrap_or_else(|| dc_sum_direct(m, h, k));
                VerificationReport::new("dcsum", "S_m(h,k) against direct summation", Scalar::Exact(v - oracle), None)
            });
            or_error(Suite::Dcsum, "S_m(h,k) against direct summation", r)
                .param("m", m)
                .param("h", h)
                .param("k", k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(parse_suites("eq7,all").unwrap().len(), 9);
        assert!(parse_suites("nope").is_err());
    }

    #[test]
    fn cheap_suites_pass() {
        let cfg = VerifyConfig::default();
        for s in [Suite::Dcsum, Suite::Measure, Suite::Eq7, Suite::Theorem21] {
            let reports = run_suite(s, &cfg);
            assert!(!reports.is_empty());
            for r in reports {
                assert!(!r.failed(), "{r:?}");
            }
        }
    }

    #[test]
    fn bad_theorem_parameters_are_reported() {
        let cfg = VerifyConfig { theorem_k: 7, ..VerifyConfig::default() };
        let r = run_suite(Suite::Theorem21, &cfg);
        assert!(r[0].failed());
    }
}
