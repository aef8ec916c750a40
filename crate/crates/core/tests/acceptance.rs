//! Acceptance suite: one line per criterion with its verdict, detail and timing.
//! Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zeta_forms::asymptotics::{alpha_via_maximization, beta_formula};
use zeta_forms::criterion::dimension_claim;
use zeta_forms::kernel::{ApproxReal, BigInt, BigRational};
use zeta_forms::linear_forms::{
    brick_lemma_checks, build_instance, expansion_residual, partial_fractions, phi_factor,
    rho_coefficients, series_sn, verify_arithmetic,
};
use zeta_forms::params::{baseline_c, constant_c, ParamSet};
use zeta_forms::presets;
use zeta_forms::step_phi::{phi_brute_force, phi_terms, varpi_for, StepFunction};

const PREC: u32 = 128;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Check {
    let err = (got - want).abs();
    if err <= tol {
        Ok(format!(
            "{label} = {got:.9} (|diff| {err:.1e} <= {tol:.0e})"
        ))
    } else {
        Err(format!(
            "{label} = {got:.9}, expected {want} within {tol:.0e} (|diff| {err:.1e})"
        ))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn normalized_c(p: &ParamSet) -> Result<(ApproxReal, ApproxReal), String> {
    let (_, w) = varpi_for(p, PREC).map_err(err)?;
    let c = constant_c(p, &w).map_err(err)?;
    let ln2 = zeta_forms::kernel::ln2(c.precision_bits());
    Ok((w, &c + &(&c * &ln2)))
}

fn c1_varpi() -> Check {
    let (_, w) = varpi_for(&presets::theorem1(), PREC).map_err(err)?;
    within("varpi(6; 0,1)", w.to_f64(), 2.157479, 1e-5)
}

fn c2_constants() -> Check {
    let mut parts = Vec::new();
    for (p, want) in presets::reference_sets() {
        let (w, norm) = normalized_c(&p)?;
        parts.push(within(
            &format!("M={} J={}", p.m, p.j()),
            norm.to_f64(),
            want,
            1e-5,
        ));
        if p == presets::claim1() {
            parts.push(within("varpi(M=444)", w.to_f64(), 11258.583028, 1e-4));
        }
    }
    all(parts)
}

fn c3_claim2() -> Check {
    let dc = dimension_claim(&presets::claim2(), PREC, 3).map_err(err)?;
    let gc = &dc.constants;
    let x0 = gc.x0.as_ref().ok_or("closed form not used")?;
    let bound = dc
        .bound
        .tests
        .iter()
        .find(|t| t.assumed_dimension == 2)
        .ok_or("no test at dimension 2")?;
    let mut parts = vec![
        within("x0", x0.to_f64(), 0.194387, 1e-5),
        within("alpha", gc.alpha.to_f64(), -38489.009014, 1e-3),
        within("beta", gc.beta.to_f64(), 58209.043057, 1e-3),
        within("varpi", gc.varpi.to_f64(), 42945.452053, 1e-3),
        within("bound at d=2", bound.value.to_f64(), 2.006260, 1e-4),
    ];
    parts.push(
        if dc.bound.certified_dimension >= 3 && dc.bound.is_consistent() {
            Ok(format!(
                "certified dimension {}",
                dc.bound.certified_dimension
            ))
        } else {
            Err(format!(
                "certified dimension {} < 3",
                dc.bound.certified_dimension
            ))
        },
    );
    all(parts)
}

fn c4_exact() -> Check {
    let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
    let mut parts = Vec::new();
    for n in 17..=20 {
        let rep = verify_arithmetic(&p, n).map_err(err)?;
        parts.push(if rep.passed() {
            Ok(format!(
                "n={n}: {} entries, {} rho",
                rep.entries_checked, rep.rho_checked
            ))
        } else {
            Err(format!(
                "n={n}: {} integrality failures, symmetry {:?}, support {:?}, rho nonzero at {:?}",
                rep.failures.len(),
                rep.symmetry_violations,
                rep.support_violations,
                rep.rho_nonvanishing
            ))
        });
    }
    all(parts)
}

fn c5_series() -> Check {
    let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
    let inst = build_instance(&p, 3).map_err(err)?;
    let rho = rho_coefficients(&partial_fractions(&inst).map_err(err)?).map_err(err)?;
    let s_n = series_sn(&inst, PREC).map_err(err)?;
    let res = expansion_residual(&s_n, &rho, PREC).map_err(err)?;
    let radius = res.error_f64();
    if res.contains(&BigRational::zero()) && radius < 1e-30 {
        Ok(format!(
            "residual {:.3e} within certified radius {radius:.3e}",
            res.to_f64()
        ))
    } else {
        Err(format!(
            "residual {res} does not enclose 0 with radius < 1e-30"
        ))
    }
}

fn random_shape(rng: &mut ChaCha8Rng) -> ParamSet {
    let m = rng.gen_range(2..=30u64);
    let j = rng.gen_range(1..=4usize);
    let mut d: Vec<u64> = (0..j).map(|_| rng.gen_range(0..m.div_ceil(2))).collect();
    d.sort_unstable();
    ParamSet::shape(m, d)
}

fn c6_properties() -> Check {
    let bricks = brick_lemma_checks(100, 42);
    let brick = if bricks.passed() && bricks.trials == 100 {
        Ok(format!(
            "bricks: {} trials, {} valuation checks, 0 violations",
            bricks.trials, bricks.valuation_checks
        ))
    } else {
        Err(format!("bricks: {} violations", bricks.violations.len()))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    for _ in 0..10 {
        let p = random_shape(&mut rng);
        let terms = phi_terms(&p);
        let sf = StepFunction::build(&terms);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=4000i64);
            let x = BigRational::new(BigInt::from(rng.gen_range(0..d)), BigInt::from(d));
            let direct = phi_brute_force(&terms, &x, 64);
            if BigInt::from(sf.value_at(&x)) != direct {
                mismatches.push(format!("M={} deltas={:?} x={x}", p.m, p.deltas));
            }
        }
    }
    let sampling = if mismatches.is_empty() {
        Ok("sampling: 10 shapes x 1000 points agree".to_string())
    } else {
        Err(format!(
            "sampling: {} mismatches, first {}",
            mismatches.len(),
            mismatches[0]
        ))
    };

    let base = baseline_c(PREC);
    let tol = BigRational::new(1.into(), BigInt::from(10u64).pow(12));
    let mut zero_bad = Vec::new();
    for m in [1u64, 2, 5, 17, 40] {
        for j in 1..=3usize {
            let p = ParamSet::shape(m, vec![0; j]);
            let (sf, w) = varpi_for(&p, PREC).map_err(err)?;
            let c = constant_c(&p, &w).map_err(err)?;
            let gap = (c.value() - base.value()).abs() + c.error_bound() + base.error_bound();
            if !sf.is_identically_zero() || gap > tol {
                zero_bad.push(format!("M={m} J={j}"));
            }
        }
    }
    let zero = if zero_bad.is_empty() {
        Ok("zero deltas: phi = 0 and C = 1/(1+log 2) for 15 shapes".to_string())
    } else {
        Err(format!("zero deltas fail at {zero_bad:?}"))
    };
    all(vec![brick, sampling, zero])
}

fn c7_trends() -> Check {
    let mut a_ratio = Vec::new();
    let mut b_ratio = Vec::new();
    for s in [100u64, 1000, 10000] {
        let p = ParamSet::new(6, vec![0, 1], s);
        let sf = s as f64;
        let alpha = alpha_via_maximization(&p).map_err(err)?.alpha;
        a_ratio.push(alpha / (-5.0 * sf * sf.ln()));
        b_ratio.push(beta_formula(&p, 64).to_f64() / (5.0 * sf * std::f64::consts::LN_2));
    }
    let toward_one = |v: &[f64]| {
        v.windows(2)
            .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs())
    };
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" -> ")
    };

    let shape = presets::theorem1();
    let (_, w) = varpi_for(&shape, 64).map_err(err)?;
    let w = w.to_f64();
    let rel: Vec<f64> = [200u64, 400, 800]
        .iter()
        .map(|&n| {
            let phi = phi_factor(&shape, n);
            // ln Φ from the top 53 bits and the bit length
            let bits = phi.bits();
            let shift = bits.saturating_sub(53);
            let top: f64 = (&phi >> shift).to_string().parse().unwrap();
            let ln_phi = top.ln() + shift as f64 * std::f64::consts::LN_2;
            ln_phi / n as f64 / w
        })
        .collect();

    all(vec![
        if toward_one(&a_ratio) {
            Ok(format!("alpha/(-5 s log s): {}", fmt(&a_ratio)))
        } else {
            Err(format!(
                "alpha/(-5 s log s) not monotone toward 1: {}",
                fmt(&a_ratio)
            ))
        },
        if toward_one(&b_ratio) {
            Ok(format!("beta/(5 s log 2): {}", fmt(&b_ratio)))
        } else {
            Err(format!(
                "beta/(5 s log 2) not monotone toward 1: {}",
                fmt(&b_ratio)
            ))
        },
        if (rel[2] - 1.0).abs() <= 0.15 {
            Ok(format!(
                "log Phi_n/(n varpi) at n=200,400,800: {}",
                fmt(&rel)
            ))
        } else {
            Err(format!(
                "log Phi_800/(800 varpi) = {:.4}, outside 15%",
                rel[2]
            ))
        },
    ])
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "varpi for M=6, deltas=(0,1)",
            budget: Some(Duration::from_secs(1)),
            run: c1_varpi,
        },
        Criterion {
            id: 2,
            name: "C(1+log 2) for six shapes",
            budget: Some(Duration::from_secs(180)),
            run: c2_constants,
        },
        Criterion {
            id: 3,
            name: "M=444 dimension claim",
            budget: Some(Duration::from_secs(600)),
            run: c3_claim2,
        },
        Criterion {
            id: 4,
            name: "exact integrality, n=17..20",
            budget: Some(Duration::from_secs(120)),
            run: c4_exact,
        },
        Criterion {
            id: 5,
            name: "series vs zeta expansion, n=3",
            budget: Some(Duration::from_secs(10)),
            run: c5_series,
        },
        Criterion {
            id: 6,
            name: "property suites",
            budget: Some(Duration::from_secs(60)),
            run: c6_properties,
        },
        Criterion {
            id: 7,
            name: "asymptotic trends",
            budget: None,
            run: c7_trends,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let t = Instant::now();
        let result = (c.run)();
        let elapsed = t.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let budget = c.budget.map_or("no limit".to_string(), |b| {
            format!("limit {:.0}s", b.as_secs_f64())
        });
        let (verdict, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over time budget; {d}")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {} [{verdict}] {} ({:.2}s, {budget}): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
