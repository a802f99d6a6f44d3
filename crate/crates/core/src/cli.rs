//! Command-line front end. Parsing lives here so that the binary stays a
//! thin shell and the dispatch is testable in-process.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dedekind::{dc_sum, euler_poly_coeffs, format_coeffs, DCSumParams};
use crate::error::{Error, Result};
use crate::genocchi::{classical_genocchi_table, g_number_base, g_poly_at};
use crate::interp::{a_tilde_integer, a_tilde_series, dc_padic, y_tilde, YParams};
use crate::report::VerificationReport;
use crate::scalar::{PAdic, QContext, Rat, ResiduePolicy, Scalar};
use crate::verify::{parse_suites, run_suites, VerifyConfig};

#[derive(Parser, Debug)]
#[command(name = "qdede", version, about = "Weighted q-Genocchi numbers, Dedekind-type sums and their p-adic interpolation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Odd prime for p-adic mode.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// p-adic working precision in digits.
    #[arg(long, global = true, env = "QDEDE_PRECISION", default_value_t = crate::scalar::DEFAULT_PRECISION)]
    pub precision: u32,
    /// `a/b`, an integer, or `1+p`, `1+p^L`, `1+B^L`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, global = true, default_value_t = 1)]
    pub alpha: u32,
    /// Defaults to p-adic when `--p` is given.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Use the alternative printed summand in the interpolation sums.
    #[arg(long, global = true)]
    pub literal: bool,
    /// What to do with residues divisible by p.
    #[arg(long, global = true, value_enum, default_value_t = PolicyArg::Reject)]
    pub residue_policy: PolicyArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Rational,
    Padic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyArg {
    Reject,
    Skip,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Table of G~_{n, q^base}, or of G~_{n, q^base}(x) with `--x`.
    Genocchi {
        #[arg(long, default_value_t = 8)]
        n_max: u64,
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 1)]
        base: u32,
    },
    /// Classical Genocchi numbers G_0..=G_n_max.
    Classical {
        #[arg(long, default_value_t = 8)]
        n_max: u64,
    },
    /// Coefficients of the Euler polynomial E_m, lowest degree first.
    Euler {
        #[arg(long)]
        m: u64,
    },
    /// Dedekind-type sum S_m(h,k).
    Dcsum {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        h: u64,
        #[arg(long)]
        k: u64,
    },
    /// Weighted q-analogue Y~_m(h,k : q^l); `l` defaults to `k`.
    Ytilde {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        h: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        l: Option<u64>,
    },
    /// p-adic Dedekind-type sum built from the interpolation function.
    Dcpadic {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        h: u64,
        #[arg(long)]
        k: u64,
    },
    /// Interpolation function A~ at an integer order `--m` or at `--s` in Z_p.
    Interp {
        #[arg(long, conflicts_with = "s", required_unless_present = "s")]
        m: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        a: i64,
        #[arg(long = "n", short = 'N')]
        n: u32,
        /// Series truncation; defaults to precision + 4.
        #[arg(long)]
        truncation: Option<u32>,
        /// Multiply the integer-order value by the Teichmüller twist.
        #[arg(long)]
        twist: bool,
    },
    /// Run verification suites.
    Verify {
        /// Comma-separated suite names, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampled points added to each exact suite.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Modulus for the theorem suite (its prime is `--p`, default 7).
        #[arg(long, default_value_t = 5)]
        k: u64,
    },
}

/// Rendered output and the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// 2 for bad parameters or configuration, 3 for arithmetic breakdowns.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DivideByZero | Error::DegenerateQ(_) | Error::NoConvergence { .. } | Error::NotOneUnit => 3,
        _ => 2,
    }
}

/// Parses a `q` token. `1+p^L` style tokens expand to the exact rational.
pub fn parse_q(token: &str, p: Option<u64>) -> Result<Rat> {
    let token = token.trim();
    let Some(rest) = token.strip_prefix("1+") else {
        return token.parse();
    };
    let (base, exp) = match rest.split_once('^') {
        Some((b, e)) => (b, e.parse::<i64>().map_err(|_| Error::Config(format!("bad exponent in {token:?}")))?),
        None => (rest, 1),
    };
    let base = if base == "p" {
        p.ok_or_else(|| Error::Config(format!("{token:?} needs --p")))? as i64
    } else {
        base.parse::<i64>().map_err(|_| Error::Config(format!("bad q token {token:?}")))?
    };
    if exp < 1 {
        return Err(Error::Config(format!("exponent in {token:?} must be positive")));
    }
    Ok(Rat::one() + Rat::from(base).pow(exp))
}

/// Builds the computation context from the global flags.
pub fn build_context(g: &GlobalOpts) -> Result<QContext> {
    let mode = g.mode.unwrap_or(if g.p.is_some() { ModeArg::Padic } else { ModeArg::Rational });
    let ctx = match mode {
        ModeArg::Rational => {
            let q = parse_q(g.q.as_deref().unwrap_or("2"), g.p)?;
            QContext::rational(q, g.alpha)?
        }
        ModeArg::Padic => {
            let p = g.p.ok_or_else(|| Error::Config("p-adic mode needs --p".into()))?;
            let q = parse_q(g.q.as_deref().unwrap_or("1+p"), Some(p))?;
            QContext::padic(p, q, g.alpha, g.precision)?
        }
    };
    let policy = match g.residue_policy {
        PolicyArg::Reject => ResiduePolicy::Reject,
        PolicyArg::Skip => ResiduePolicy::Skip,
    };
    Ok(ctx.with_literal_mode(g.literal).with_residue_policy(policy))
}

fn value_json(v: &Scalar) -> Value {
    match v {
        Scalar::Exact(r) => serde_json::to_value(r).expect("serializable rational"),
        Scalar::PAdic(x) => serde_json::to_value(x).expect("serializable p-adic"),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn render_table(rows: &[(String, Scalar)], key: &str, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            let arr: Vec<Value> = rows.iter().map(|(k, v)| json!({ key: k, "value": value_json(v) })).collect();
            out = serde_json::to_string_pretty(&arr).expect("json");
            out.push('\n');
        }
        Format::Csv => {
            writeln!(out, "{key},value").unwrap();
            for (k, v) in rows {
                writeln!(out, "{},{}", csv_field(k), csv_field(&v.to_string())).unwrap();
            }
        }
        Format::Text => {
            for (k, v) in rows {
                writeln!(out, "{k}: {v}").unwrap();
            }
        }
    }
    out
}

fn context_json(ctx: &QContext) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), json!(format!("{:?}", ctx.mode()).to_lowercase()));
    m.insert("q".into(), json!(ctx.q().to_string()));
    m.insert("alpha".into(), json!(ctx.alpha()));
    if let Ok(p) = ctx.p() {
        m.insert("p".into(), json!(p));
        m.insert("precision".into(), json!(ctx.precision()));
    }
    if ctx.literal_mode() {
        m.insert("literal".into(), json!(true));
    }
    Value::Object(m)
}

fn render_value(command: &str, params: Value, value: &Scalar, formula: &str, ctx: Option<&QContext>, format: Format) -> String {
    let context = ctx.map(context_json).unwrap_or(Value::Null);
    match format {
        Format::Json => {
            let v = json!({
                "command": command,
                "params": params,
                "context": context,
                "value": value_json(value),
                "formula": formula,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "command,value,formula\n{},{},{}\n",
            command,
            csv_field(&value.to_string()),
            csv_field(formula)
        ),
        Format::Text => {
            let mut s = format!("{value}\n# formula: {formula}\n");
            if let Value::Object(m) = context {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}={}", v.to_string().trim_matches('"'))).collect();
                writeln!(s, "# context: {}", parts.join(" ")).unwrap();
            }
            s
        }
    }
}

fn render_reports(reports: &[VerificationReport], format: Format) -> String {
    match format {
        Format::Json => crate::report::to_json(reports),
        Format::Csv => {
            let mut s = String::from("suite,identity,params,residual,pass,informational,notes\n");
            for r in reports {
                let params = serde_json::to_string(&r.params).expect("json");
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.suite,
                    csv_field(&r.identity),
                    csv_field(&params),
                    csv_field(&r.residual.to_string()),
                    r.pass,
                    r.informational,
                    csv_field(&r.notes)
                )
                .unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                let status = if r.informational {
                    "INFO"
                } else if r.pass {
                    "PASS"
                } else {
                    "FAIL"
                };
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", v.to_string().trim_matches('"'))).collect();
                write!(s, "{status} {} [{}] {} residual={}", r.suite, params.join(" "), r.identity, r.residual).unwrap();
                if !r.notes.is_empty() {
                    write!(s, " ({})", r.notes).unwrap();
                }
                s.push('\n');
            }
            let failed = reports.iter().filter(|r| r.failed()).count();
            let checked = reports.iter().filter(|r| !r.informational).count();
            writeln!(s, "{} checks, {} failed, {} informational", checked, failed, reports.len() - checked).unwrap();
            s
        }
    }
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let ok = |stdout: String| Ok(Outcome { stdout, code: 0 });
    match &cli.command {
        Command::Classical { n_max } => {
            let rows: Vec<(String, Scalar)> = classical_genocchi_table(*n_max)
                .into_iter()
                .enumerate()
                .map(|(n, v)| (n.to_string(), Scalar::Exact(v)))
                .collect();
            ok(render_table(&rows, "n", g.format))
        }
        Command::Euler { m } => {
            let rows: Vec<(String, Scalar)> = euler_poly_coeffs(*m)
                .into_iter()
                .enumerate()
                .map(|(i, c)| (i.to_string(), Scalar::Exact(c)))
                .collect();
            match g.format {
                Format::Json => {
                    let v = json!({ "m": m, "coefficients": format_coeffs(&euler_poly_coeffs(*m)) });
                    ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
                }
                _ => ok(render_table(&rows, "degree", g.format)),
            }
        }
        Command::Genocchi { n_max, x, base } => {
            let ctx = build_context(g)?;
            let x = x.as_deref().map(str::parse::<Rat>).transpose()?;
            let mut rows = Vec::new();
            for n in 0..=*n_max {
                let v = match &x {
                    None => g_number_base(n, *base, &ctx)?,
                    Some(x) => g_poly_at(n, x, *base, &ctx)?,
                };
                rows.push((n.to_string(), v));
            }
            ok(render_table(&rows, "n", g.format))
        }
        Command::Dcsum { m, h, k } => {
            let v = dc_sum(DCSumParams::new(*m, *h, *k)?)?;
            ok(render_value(
                "dcsum",
                json!({ "m": m, "h": h, "k": k }),
                &Scalar::Exact(v),
                "S_m(h,k) = sum_{M=1}^{k-1} (-1)^(M-1) (M/k) E~_m(hM/k)",
                None,
                g.format,
            ))
        }
        Command::Ytilde { m, h, k, l } => {
            let ctx = build_context(g)?;
            let l = l.unwrap_or(*k);
            let v = y_tilde(YParams::new(*m, *h, *k, l)?, &ctx)?;
            ok(render_value(
                "ytilde",
                json!({ "m": m, "h": h, "k": k, "l": l }),
                &v,
                "Y~ = sum_M (-1)^(M-1) ([M]/[k]) G~_{m+1,q^l}({hM/k}) / (m+1)",
                Some(&ctx),
                g.format,
            ))
        }
        Command::Dcpadic { m, h, k } => {
            let ctx = build_context(g)?;
            let v = dc_padic(*m, *h, *k, &ctx)?;
            ok(render_value(
                "dcpadic",
                json!({ "m": m, "h": h, "k": k }),
                &v,
                "sum_M (-1)^(M-1) [M] A~(m, (hM)_k, k), Teichmüller-twisted in p-adic mode",
                Some(&ctx),
                g.format,
            ))
        }
        Command::Interp { m, s, a, n, truncation, twist } => {
            let ctx = build_context(g)?;
            match (m, s) {
                (Some(m), _) => {
                    let v = a_tilde_integer(*m, *a, *n, &ctx, *twist)?;
                    ok(render_value(
                        "interp",
                        json!({ "m": m, "a": a, "N": n, "twist": twist }),
                        &v,
                        "[a]^m sum_j C(m,j) q^(alpha a j) ([N]/[a])^j G~_{j+1,q^N}/(j+1)",
                        Some(&ctx),
                        g.format,
                    ))
                }
                (None, Some(s)) => {
                    let p = ctx.require_padic("the interpolation series")?;
                    let work = ctx.precision() + 4;
                    let s_val = PAdic::from_rat(&s.parse::<Rat>()?, p, work);
                    let t = truncation.unwrap_or(work);
                    let v = a_tilde_series(&s_val, *a, *n, &ctx, t)?;
                    ok(render_value(
                        "interp",
                        json!({ "s": s, "a": a, "N": n, "truncation": t }),
                        &Scalar::PAdic(v),
                        "w^(-1)(a) <a:q^alpha>^s sum_j C(s,j) q^(alpha a j) ([N]/[a])^j G~_{j+1,q^N}/(j+1)",
                        Some(&ctx),
                        g.format,
                    ))
                }
                (None, None) => Err(Error::Config("interp needs --m or --s".into())),
            }
        }
        Command::Verify { suite, seed, samples, k } => {
            let suites = parse_suites(suite)?;
            let cfg = VerifyConfig {
                seed: *seed,
                samples: *samples,
                theorem_p: g.p.unwrap_or(7),
                theorem_k: *k,
                precision: g.precision,
            };
            let reports = run_suites(&suites, &cfg);
            let code = if reports.iter().any(VerificationReport::failed) { 1 } else { 0 };
            Ok(Outcome { stdout: render_reports(&reports, g.format), code })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Outcome> {
        let mut full = vec!["qdede"];
        full.extend_from_slice(args);
        run(&Cli::try_parse_from(full).expect("valid arguments"))
    }

    #[test]
    fn q_tokens() {
        assert_eq!(parse_q("2/3", None).unwrap(), Rat::new(2, 3));
        assert_eq!(parse_q("1+p", Some(7)).unwrap(), Rat::from(8));
        assert_eq!(parse_q("1+p^2", Some(5)).unwrap(), Rat::from(26));
        assert_eq!(parse_q("1+5^3", None).unwrap(), Rat::from(126));
        assert!(parse_q("1+p", None).is_err());
        assert!(parse_q("x", None).is_err());
    }

    #[test]
    fn tables() {
        let out = run_args(&["genocchi", "--n-max", "2", "--q", "2", "--mode", "rational"]).unwrap();
        assert_eq!(out.stdout, "0: 0\n1: 3/2\n2: -1\n");
        let out = run_args(&["classical", "--n-max", "6", "--format", "csv"]).unwrap();
        assert_eq!(out.stdout, "n,value\n0,0\n1,1\n2,-1\n3,0\n4,1\n5,0\n6,-3\n");
        let out = run_args(&["euler", "--m", "2", "--format", "json"]).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["coefficients"], json!(["0", "-1", "1"]));
    }

    #[test]
    fn sums() {
        let out = run_args(&["dcsum", "--m", "1", "--h", "1", "--k", "3"]).unwrap();
        assert!(out.stdout.starts_with("-1/6\n"));
        let out = run_args(&["dcpadic", "--p", "7", "--k", "5", "--h", "1", "--m", "5", "--q", "1+p", "--format", "json"]).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert!(v["value"]["num"].is_string() && v["value"]["den"].is_string());
    }

    #[test]
    fn errors_map_to_codes() {
        let e = run_args(&["dcsum", "--m", "1", "--h", "2", "--k", "4"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let e = run_args(&["genocchi", "--q", "1", "--mode", "rational"]).unwrap_err();
        assert_eq!(exit_code(&e), 3);
        let e = run_args(&["dcpadic", "--m", "1", "--h", "1", "--k", "3"]);
        assert!(e.is_ok(), "rational mode needs no prime");
        let e = run_args(&["interp", "--s", "3", "--a", "1", "--n", "3", "--p", "5"]).unwrap_err();
        assert_eq!(e, Error::SeriesDivergence(3));
    }
}
