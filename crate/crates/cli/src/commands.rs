//! Command implementations. Each returns the rendered report plus the resolved
//! configuration; a verification mismatch is carried alongside the report so the
//! report is still written.

use serde::Serialize;
use serde_json::{json, Value};

use zeta_forms::asymptotics::growth_constants;
use zeta_forms::criterion::{dimension_claim, nesterenko_bound};
use zeta_forms::kernel::{ln2, ApproxReal, BigRational};
use zeta_forms::linear_forms::{
    build_instance, expansion_residual, partial_fractions, phi_factor, rho_coefficients, series_sn,
    verify_arithmetic,
};
use zeta_forms::params::{baseline_c, constant_c, ParamSet};
use zeta_forms::presets;
use zeta_forms::search::{search_with, Evaluator, SearchConfig, Strategy};
use zeta_forms::step_phi::varpi_for;

use crate::{ClaimName, Cli, Command, Failure, Format, GlobalOpts};

/// Dimension targeted by the named dimension claim.
const CLAIM_TARGET_DIM: u64 = 3;

pub struct Outcome {
    pub body: String,
    pub config: Value,
    /// Set when the command ran but a check failed.
    pub mismatch: Option<Failure>,
}

impl Outcome {
    fn ok(body: String, config: Value) -> Self {
        Outcome {
            body,
            config,
            mismatch: None,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Phi(o) => phi(&o.resolve_shape()?, g),
        Command::Varpi(o) => varpi(&o.resolve_shape()?, g),
        Command::ConstantC(o) => constant(&o.resolve_shape()?, g),
        Command::BuildForm { params, n } => build_form(&params.resolve()?, *n, g),
        Command::Verify { params, n, n_range } => {
            let p = params.resolve()?;
            let ns = match (n, n_range) {
                (Some(n), _) => vec![*n],
                (None, Some(r)) => parse_range(r)?,
                (None, None) => {
                    return Err(Failure::Validation(
                        "one of --n or --n-range is required".into(),
                    ))
                }
            };
            verify(&p, &ns, g)
        }
        Command::Asympt(o) => asympt(&o.resolve()?, g),
        Command::Claim { name } => claim(*name, g),
        Command::Search { config, cache } => search(config, cache.as_deref(), g),
        Command::Replay { .. } => Err(Failure::Validation("replay cannot be nested".into())),
    }
}

/// Inclusive `a..b` with `1 ≤ a ≤ b`.
pub fn parse_range(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || {
        Failure::Validation(format!(
            "--n-range expects a..b with 1 <= a <= b, got {s:?}"
        ))
    };
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn params_json(p: &ParamSet) -> Value {
    serde_json::to_value(p).expect("ParamSet serializes")
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

/// `name,value,error_bound` rows for reports without a natural table.
fn kv_csv(rows: &[(&str, String, String)]) -> String {
    let mut out = String::from("name,value,error_bound\n");
    for (k, v, e) in rows {
        out.push_str(&format!("{k},{v},{e}\n"));
    }
    out
}

fn kv(name: &'static str, x: &ApproxReal) -> (&'static str, String, String) {
    (name, x.to_decimal(12), format!("{:.3e}", x.error_f64()))
}

fn phi(p: &ParamSet, g: &GlobalOpts) -> Result<Outcome, Failure> {
    let (sf, w) = varpi_for(p, g.precision)?;
    let body = match g.format {
        Format::Json => to_json(&json!({
            "params": params_json(p),
            "identically_zero": sf.is_identically_zero(),
            "intervals": sf.intervals().map(|(a, b, v)| json!([a.to_string(), b.to_string(), v])).collect::<Vec<_>>(),
            "varpi": w,
        })),
        Format::Csv => {
            let mut out = String::from("from,to,value\n");
            for (a, b, v) in sf.intervals() {
                out.push_str(&format!("{a},{b},{v}\n"));
            }
            out
        }
        Format::Text if sf.is_identically_zero() => "phi identically 0; varpi = 0\n".to_string(),
        Format::Text => {
            let mut out = format!(
                "phi for M = {}, deltas = {:?}: {} intervals\n",
                p.m,
                p.deltas,
                sf.len()
            );
            for (a, b, v) in sf.intervals() {
                out.push_str(&format!("[{a}, {b})  {v}\n"));
            }
            out.push_str(&format!("varpi = {w}\n"));
            out
        }
    };
    Ok(Outcome::ok(body, params_json(p)))
}

fn varpi(p: &ParamSet, g: &GlobalOpts) -> Result<Outcome, Failure> {
    let (_, w) = varpi_for(p, g.precision)?;
    let body = match g.format {
        Format::Json => to_json(&json!({ "params": params_json(p), "varpi": w })),
        Format::Csv => kv_csv(&[kv("varpi", &w)]),
        Format::Text => format!("varpi = {w}\n"),
    };
    Ok(Outcome::ok(body, params_json(p)))
}

fn constant(p: &ParamSet, g: &GlobalOpts) -> Result<Outcome, Failure> {
    let (_, w) = varpi_for(p, g.precision)?;
    let c = constant_c(p, &w)?;
    let norm = &c + &(&c * &ln2(c.precision_bits()));
    let base = baseline_c(g.precision);
    let body = match g.format {
        Format::Json => to_json(&json!({
            "params": params_json(p), "varpi": w, "C": c, "C_times_1_plus_log2": norm, "baseline": base,
        })),
        Format::Csv => kv_csv(&[kv("varpi", &w), kv("C", &c), kv("C_times_1_plus_log2", &norm), kv("baseline", &base)]),
        Format::Text => format!(
            "varpi            = {w}\nC                = {c}\nC*(1 + log 2)    = {norm}\nbaseline 1/(1+log 2) = {base}\n"
        ),
    };
    Ok(Outcome::ok(body, params_json(p)))
}

fn build_form(p: &ParamSet, n: u64, g: &GlobalOpts) -> Result<Outcome, Failure> {
    let inst = build_instance(p, n)?;
    let table = partial_fractions(&inst)?;
    let rho = rho_coefficients(&table)?;
    let phi = phi_factor(p, n);
    let s_n = series_sn(&inst, g.precision)?;
    let config = json!({ "params": params_json(p), "n": n });
    let body = match g.format {
        Format::Json => to_json(&json!({
            "params": params_json(p), "n": n, "degree": inst.degree(), "pole_range": inst.pole_range(),
            "rho": rho, "Phi_n": phi.to_string(), "S_n": s_n,
        })),
        Format::Csv => {
            let mut out = String::from("i,rho\n");
            for i in rho.active_indices() {
                out.push_str(&format!("{i},{}\n", rho.get(i)));
            }
            out
        }
        Format::Text => {
            let (lo, hi) = inst.pole_range();
            let mut out = format!(
                "R_n for n = {n}: degree {}, poles in [{lo}, {hi}]\n",
                inst.degree()
            );
            for i in rho.active_indices() {
                out.push_str(&format!("rho_{i} = {}\n", rho.get(i)));
            }
            out.push_str(&format!("Phi_n = {phi}\nS_n = {s_n}\n"));
            out
        }
    };
    Ok(Outcome::ok(body, config))
}

#[derive(Serialize)]
struct VerifyRow {
    n: u64,
    residual: ApproxReal,
    residual_ok: bool,
    /// Absent when `n ≤ s²`.
    arithmetic: Option<zeta_forms::linear_forms::ArithmeticReport>,
}

fn verify(p: &ParamSet, ns: &[u64], g: &GlobalOpts) -> Result<Outcome, Failure> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &n in ns {
        let inst = build_instance(p, n)?;
        let rho = rho_coefficients(&partial_fractions(&inst)?)?;
        let s_n = series_sn(&inst, g.precision)?;
        let residual = expansion_residual(&s_n, &rho, g.precision)?;
        let residual_ok = residual.contains(&BigRational::from_integer(0.into()));
        let arithmetic = if n > p.s * p.s {
            Some(verify_arithmetic(p, n)?)
        } else {
            warnings.push(format!(
                "n = {n} <= s^2 = {}: divisibility checks skipped",
                p.s * p.s
            ));
            None
        };
        rows.push(VerifyRow {
            n,
            residual,
            residual_ok,
            arithmetic,
        });
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let failed: Vec<u64> = rows
        .iter()
        .filter(|r| !r.residual_ok || r.arithmetic.as_ref().is_some_and(|a| !a.passed()))
        .map(|r| r.n)
        .collect();
    let body = match g.format {
        Format::Json => {
            to_json(&json!({ "params": params_json(p), "rows": rows, "warnings": warnings }))
        }
        Format::Csv => {
            let mut out = String::from("n,residual,residual_ok,arithmetic\n");
            for r in &rows {
                let a = match &r.arithmetic {
                    None => "skipped",
                    Some(a) if a.passed() => "pass",
                    Some(_) => "fail",
                };
                out.push_str(&format!(
                    "{},{},{},{a}\n",
                    r.n,
                    r.residual.to_decimal(6),
                    r.residual_ok
                ));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in &rows {
                out.push_str(&format!(
                    "n = {}: residual {} [{}]",
                    r.n,
                    r.residual,
                    if r.residual_ok { "ok" } else { "FAIL" }
                ));
                match &r.arithmetic {
                    None => out.push_str("; divisibility skipped (n <= s^2)\n"),
                    Some(a) if a.passed() => out.push_str(&format!(
                        "; integrality ok ({} entries, {} rho)\n",
                        a.entries_checked, a.rho_checked
                    )),
                    Some(a) => out.push_str(&format!(
                        "; integrality FAIL ({} failures)\n",
                        a.failures.len()
                    )),
                }
            }
            out
        }
    };
    let mismatch = (!failed.is_empty())
        .then(|| Failure::Mismatch(format!("verification failed for n in {failed:?}")));
    Ok(Outcome {
        body,
        config: json!({ "params": params_json(p), "n": ns }),
        mismatch,
    })
}

fn asympt(p: &ParamSet, g: &GlobalOpts) -> Result<Outcome, Failure> {
    let gc = growth_constants(p, g.precision)?;
    let bound = nesterenko_bound(&gc.alpha_hat, &gc.beta_hat).ok();
    let body = match g.format {
        Format::Json => {
            to_json(&json!({ "params": params_json(p), "constants": gc, "bound": bound }))
        }
        Format::Csv => {
            let mut rows = vec![
                kv("alpha", &gc.alpha),
                kv("beta", &gc.beta),
                kv("varpi", &gc.varpi),
                kv("alpha_hat", &gc.alpha_hat),
                kv("beta_hat", &gc.beta_hat),
            ];
            if let Some(x0) = &gc.x0 {
                rows.push(kv("x0", x0));
            }
            if let Some(b) = &bound {
                rows.push(kv("bound", b));
            }
            kv_csv(&rows)
        }
        Format::Text => {
            let mut out = String::new();
            if let Some(x0) = &gc.x0 {
                out.push_str(&format!("x0        = {x0}\n"));
            }
            out.push_str(&format!(
                "alpha     = {}{}\nbeta      = {}\nvarpi     = {}\nalpha_hat = {}\nbeta_hat  = {}\n",
                gc.alpha,
                if gc.alpha_certified { "" } else { "  (maximizer estimate, not certified)" },
                gc.beta,
                gc.varpi,
                gc.alpha_hat,
                gc.beta_hat
            ));
            match &bound {
                Some(b) => out.push_str(&format!("1 - alpha_hat/beta_hat = {b}\n")),
                None => out.push_str("sign condition alpha_hat < 0 < beta_hat fails; no bound\n"),
            }
            out
        }
    };
    Ok(Outcome::ok(body, params_json(p)))
}

fn claim(name: ClaimName, g: &GlobalOpts) -> Result<Outcome, Failure> {
    match name {
        ClaimName::Theorem1 | ClaimName::Claim1 => {
            let p = if name == ClaimName::Theorem1 {
                presets::theorem1()
            } else {
                presets::claim1()
            };
            let mut out = constant(&p, g)?;
            if g.format == Format::Text {
                let (_, w) = varpi_for(&p, g.precision)?;
                let c = constant_c(&p, &w)?;
                let above = c.lower() > baseline_c(g.precision).upper();
                out.body.push_str(&format!(
                    "C > 1/(1 + log 2): {}\n",
                    if above { "certified" } else { "NOT certified" }
                ));
            }
            Ok(out)
        }
        ClaimName::Claim2 => {
            let p = presets::claim2();
            let dc = dimension_claim(&p, g.precision, CLAIM_TARGET_DIM)?;
            let body = match g.format {
                Format::Json => to_json(&dc),
                Format::Csv => {
                    let gc = &dc.constants;
                    let mut rows = vec![
                        kv("varpi", &gc.varpi),
                        kv("alpha", &gc.alpha),
                        kv("beta", &gc.beta),
                        kv("alpha_hat", &gc.alpha_hat),
                        kv("beta_hat", &gc.beta_hat),
                    ];
                    if let Some(x0) = &gc.x0 {
                        rows.push(kv("x0", x0));
                    }
                    let mut out = kv_csv(&rows);
                    for t in &dc.bound.tests {
                        out.push_str(&format!(
                            "bound_dim_{},{},{:.3e}\n",
                            t.assumed_dimension,
                            t.value.to_decimal(12),
                            t.value.error_f64()
                        ));
                    }
                    out.push_str(&format!(
                        "certified_dimension,{},0\n",
                        dc.bound.certified_dimension
                    ));
                    out
                }
                Format::Text => {
                    let gc = &dc.constants;
                    let mut out = format!("M = {}, J = {}, s = {}, r = {}\n", p.m, p.j(), p.s, p.r);
                    if let Some(x0) = &gc.x0 {
                        out.push_str(&format!("{:<28} {x0}\n", "x0"));
                    }
                    out.push_str(&format!("{:<28} {}\n", "alpha", gc.alpha));
                    out.push_str(&format!("{:<28} {}\n", "beta", gc.beta));
                    out.push_str(&format!("{:<28} {}\n", "varpi", gc.varpi));
                    out.push_str(&format!(
                        "{:<28} D_{{{}n}}^{} (gamma = {})\n",
                        "common divisor", dc.divisor.m_star, dc.divisor.c, dc.divisor.gamma
                    ));
                    out.push_str(&dc.bound.to_text());
                    out
                }
            };
            let mismatch = (dc.bound.certified_dimension < CLAIM_TARGET_DIM).then(|| {
                Failure::Mismatch(format!(
                    "certified dimension {} < {CLAIM_TARGET_DIM}",
                    dc.bound.certified_dimension
                ))
            });
            Ok(Outcome {
                body,
                config: params_json(&p),
                mismatch,
            })
        }
    }
}

fn search(
    path: &std::path::Path,
    cache: Option<&std::path::Path>,
    g: &GlobalOpts,
) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let mut cfg = SearchConfig::from_toml(&text).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(s) = g.seed {
        match &mut cfg.strategy {
            Strategy::Random { seed, .. } | Strategy::Local { seed, .. } => *seed = s,
            Strategy::Exhaustive | Strategy::List { .. } => {}
        }
    }
    let bad = cfg.violations();
    if !bad.is_empty() {
        return Err(Failure::Validation(bad.join("; ")));
    }
    let ev = match cache {
        Some(c) if c.exists() => {
            Evaluator::load(c).map_err(|e| Failure::Computation(format!("{}: {e}", c.display())))?
        }
        _ => Evaluator::new(),
    };
    let report = search_with(&cfg, &ev)?;
    if let Some(c) = cache {
        ev.save(c)
            .map_err(|e| Failure::Computation(format!("{}: {e}", c.display())))?;
    }
    let body = match g.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut buf = Vec::new();
            report
                .write_csv(&mut buf)
                .map_err(|e| Failure::Computation(e.to_string()))?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        Format::Text => {
            let mut out = format!(
                "{} shapes evaluated, {} rejected\n",
                report.evaluated,
                report.rejected.len()
            );
            out.push_str(&format!(
                "baseline C*(1 + log 2) = 1\n{:<4} {:<40} {:>14}\n",
                "rank", "shape", "C*(1+log 2)"
            ));
            for (i, c) in report.ranked.iter().enumerate() {
                out.push_str(&format!(
                    "{:<4} {:<40} {:>14}\n",
                    i + 1,
                    c.key.to_string(),
                    c.normalized().to_decimal(8)
                ));
            }
            out
        }
    };
    Ok(Outcome::ok(
        body,
        serde_json::to_value(&cfg).expect("config serializes"),
    ))
}
