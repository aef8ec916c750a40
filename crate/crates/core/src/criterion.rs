//! Dimension lower bounds from the growth constants: the plain criterion
//! `dim ≥ 1 − α̂/β̂` and its refinement with structured coefficient divisors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::asymptotics::{growth_constants, GrowthConstants};
use crate::error::{Error, Result};
use crate::kernel::{lcm_upto, ApproxReal};
use crate::linear_forms::{build_instance, partial_fractions, phi_factor, rho_coefficients};
use crate::params::ParamSet;

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub label: String,
    pub value: ApproxReal,
}

/// One contrapositive test: assuming the dimension equals `assumed_dimension`,
/// the refined criterion gives `value`; a certified `value > assumed_dimension`
/// rules that dimension out.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionTest {
    pub assumed_dimension: u64,
    pub gamma_terms: u64,
    pub value: ApproxReal,
    pub contradiction: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub alpha_hat: ApproxReal,
    pub beta_hat: ApproxReal,
    pub gammas: Vec<ApproxReal>,
    /// `1 − α̂/β̂`.
    pub raw_bound: ApproxReal,
    pub certified_dimension: u64,
    pub tests: Vec<DimensionTest>,
    pub trace: Vec<TraceEntry>,
}

impl BoundReport {
    /// Human-readable report with every intermediate value and its error bound.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.trace {
            out.push_str(&format!("{:<28} {}\n", t.label, t.value));
        }
        for t in &self.tests {
            out.push_str(&format!(
                "assume dim = {:<3} ({} gamma terms): bound {} -> {}\n",
                t.assumed_dimension,
                t.gamma_terms,
                t.value,
                if t.contradiction {
                    "contradiction"
                } else {
                    "no contradiction"
                }
            ));
        }
        out.push_str(&format!(
            "certified dimension >= {}\n",
            self.certified_dimension
        ));
        out
    }

    /// Recomputes every test line from `α̂, β̂, γ` and checks the verdicts.
    pub fn is_consistent(&self) -> bool {
        let gamma = self
            .gammas
            .first()
            .cloned()
            .unwrap_or_else(|| ApproxReal::zero(64));
        let first_open = self
            .tests
            .iter()
            .find(|t| !t.contradiction)
            .map(|t| t.assumed_dimension);
        self.tests.iter().all(|t| {
            let v = refined_value(&self.alpha_hat, &self.beta_hat, &gamma, t.gamma_terms);
            v.overlaps(&t.value)
                && t.contradiction == certifies_above(&t.value, t.assumed_dimension)
        }) && first_open.is_none_or(|d| d == self.certified_dimension)
    }
}

fn check_signs(alpha_hat: &ApproxReal, beta_hat: &ApproxReal) -> Result<()> {
    if !alpha_hat.is_negative() || !beta_hat.is_positive() {
        return Err(Error::SignPrecondition(format!(
            "alpha_hat = {alpha_hat}, beta_hat = {beta_hat}"
        )));
    }
    Ok(())
}

/// `1 − α̂/β̂`, requiring `α̂ < 0 < β̂` for the whole enclosures.
pub fn nesterenko_bound(alpha_hat: &ApproxReal, beta_hat: &ApproxReal) -> Result<ApproxReal> {
    check_signs(alpha_hat, beta_hat)?;
    let q = alpha_hat.checked_div(beta_hat)?;
    Ok(&ApproxReal::from_int(1, q.precision_bits()) - &q)
}

/// `1 − (α̂ − Σγ_i)/β̂` for arbitrary non-negative `γ_i`.
pub fn refined_bound(
    alpha_hat: &ApproxReal,
    beta_hat: &ApproxReal,
    gammas: &[ApproxReal],
) -> Result<ApproxReal> {
    let shifted = gammas.iter().fold(alpha_hat.clone(), |acc, g| &acc - g);
    check_signs(alpha_hat, beta_hat)?;
    let q = shifted.checked_div(beta_hat)?;
    Ok(&ApproxReal::from_int(1, q.precision_bits()) - &q)
}

fn refined_value(
    alpha_hat: &ApproxReal,
    beta_hat: &ApproxReal,
    gamma: &ApproxReal,
    terms: u64,
) -> ApproxReal {
    let shifted = alpha_hat - &gamma.mul_int(terms as i64);
    let q = shifted.checked_div(beta_hat).expect("beta_hat > 0 checked");
    &ApproxReal::from_int(1, q.precision_bits()) - &q
}

fn certifies_above(v: &ApproxReal, d: u64) -> bool {
    v.lower() > BigRational::from_integer(BigInt::from(d))
}

/// Largest `D ≤ target_d` such that every dimension `d < D` is ruled out by
/// `1 − (α̂ − (d−1)γ)/β̂ > d`. With `γ = 0` this is `⌈1 − α̂/β̂⌉` whenever
/// the enclosure does not straddle an integer.
pub fn refined_dimension(
    alpha_hat: &ApproxReal,
    beta_hat: &ApproxReal,
    gamma: &ApproxReal,
    target_d: u64,
) -> Result<BoundReport> {
    check_signs(alpha_hat, beta_hat)?;
    if gamma.lower() < BigRational::zero() {
        return Err(Error::PreconditionViolation(format!(
            "gamma = {gamma} must be non-negative"
        )));
    }
    let raw_bound = nesterenko_bound(alpha_hat, beta_hat)?;
    let mut trace = vec![
        TraceEntry {
            label: "alpha_hat".into(),
            value: alpha_hat.clone(),
        },
        TraceEntry {
            label: "beta_hat".into(),
            value: beta_hat.clone(),
        },
        TraceEntry {
            label: "gamma".into(),
            value: gamma.clone(),
        },
        TraceEntry {
            label: "1 - alpha_hat/beta_hat".into(),
            value: raw_bound.clone(),
        },
    ];
    let mut tests = Vec::new();
    let mut certified = target_d.max(1);
    for d in 1..target_d.max(1) {
        // dimension d means d − 1 irrational values beside 1, hence d − 1 divisor rates
        let value = refined_value(alpha_hat, beta_hat, gamma, d - 1);
        let contradiction = certifies_above(&value, d);
        trace.push(TraceEntry {
            label: format!("bound assuming dim = {d}"),
            value: value.clone(),
        });
        tests.push(DimensionTest {
            assumed_dimension: d,
            gamma_terms: d - 1,
            value,
            contradiction,
        });
        if !contradiction {
            certified = d;
            break;
        }
    }
    Ok(BoundReport {
        alpha_hat: alpha_hat.clone(),
        beta_hat: beta_hat.clone(),
        gammas: vec![gamma.clone()],
        raw_bound,
        certified_dimension: certified,
        tests,
        trace,
    })
}

/// The divisor `D_{m_star·n}^c` shared by the integerized coefficients of
/// `ζ(i)`, `i ≥ 3`, and its growth rate `γ = c·m_star`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DivisorChoice {
    pub m_star: u64,
    pub c: u64,
    pub gamma: u64,
}

/// After clearing `ρ_0` with `Π_j D_{M_j n}^{s/J}`, the coefficient of `ζ(i)`
/// only needs `s − i` of those `s` factors (each divisible by `D_{(M−2δ₁)n}`),
/// so the `i ≥ 3` largest remain as a common divisor. Among `D_{m_c n}^c` with
/// `m_c` the `c`-th largest `M_j` (counted with multiplicity) and `c ≤ 3`,
/// this picks the one with the largest rate `c·m_c`, preferring larger `c` on ties.
pub fn gamma_from_divisors(p: &ParamSet) -> DivisorChoice {
    let mut mult: Vec<u64> = p
        .m_js()
        .into_iter()
        .flat_map(|m| std::iter::repeat_n(m, p.e() as usize))
        .collect();
    mult.sort_unstable_by(|a, b| b.cmp(a));
    let mut best = DivisorChoice {
        m_star: 0,
        c: 0,
        gamma: 0,
    };
    for c in 1..=3u64.min(mult.len() as u64) {
        let m = mult[c as usize - 1];
        if c * m >= best.gamma {
            best = DivisorChoice {
                m_star: m,
                c,
                gamma: c * m,
            };
        }
    }
    best
}

/// Odd `i ≥ 3` whose integerized coefficient `Φ_n^{-e}Π_j D_{M_j n}^e ρ_i` is
/// not divisible by `D_{m_star·n}^c`. Requires `n > s²`.
pub fn divisor_failures(p: &ParamSet, n: u64, choice: &DivisorChoice) -> Result<Vec<usize>> {
    if n <= p.s * p.s {
        return Err(Error::PreconditionViolation(format!(
            "n = {n} must exceed s^2"
        )));
    }
    let rho = rho_coefficients(&partial_fractions(&build_instance(p, n)?)?)?;
    let e = p.e() as u32;
    let mut clear = BigInt::from(1);
    for mj in p.m_js() {
        clear *= lcm_upto(mj * n).pow(e);
    }
    let scale = BigRational::new(clear, phi_factor(p, n).pow(e));
    let d = BigRational::from_integer(lcm_upto(choice.m_star * n).pow(choice.c as u32));
    Ok((3..=p.s as usize)
        .step_by(2)
        .filter(|&i| !(rho.get(i) * &scale / &d).is_integer())
        .collect())
}

/// Growth constants, divisor choice and the refined bound for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionClaim {
    pub params: ParamSet,
    pub constants: GrowthConstants,
    pub divisor: DivisorChoice,
    pub bound: BoundReport,
}

pub fn dimension_claim(p: &ParamSet, prec: u32, target_d: u64) -> Result<DimensionClaim> {
    let constants = growth_constants(p, prec)?;
    let divisor = gamma_from_divisors(p);
    let gamma = ApproxReal::from_int(divisor.gamma, prec);
    let bound = refined_dimension(&constants.alpha_hat, &constants.beta_hat, &gamma, target_d)?;
    Ok(DimensionClaim {
        params: p.clone(),
        constants,
        divisor,
        bound,
    })
}
