//! Partial fractions `R_n(t) = Σ a_{n,i,k} / (t+k)^i` and the coefficients `ρ_{n,i}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::poly;
use super::RationalFunctionInstance;
use crate::error::{Error, Result};
use crate::kernel::generalized_harmonic;
use crate::params::ParamSet;

/// `a_{n,i,k}` for `1 ≤ i ≤ s` and `δ₁n ≤ k ≤ (M−δ₁)n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFractionTable {
    pub n: u64,
    pub s: u64,
    pub m: u64,
    pub delta1: u64,
    k_lo: i64,
    /// `rows[k − k_lo][i − 1]`
    rows: Vec<Vec<BigRational>>,
}

/// Coefficients of `(t+k)^{s−1}, …, (t+k)^0` in `R_n(t)(t+k)^s`, i.e. `a_{s,k}, …, a_{1,k}`.
fn pole_coefficients(inst: &RationalFunctionInstance, k: i64, s: usize) -> Vec<BigRational> {
    let mut num = poly::one(s);
    let mut den = poly::one(s);
    let mut scale = inst.normalization.clone();
    let mut v = 0usize;
    for b in &inst.bricks {
        let ls = b.local_series(k, s);
        let e = b.exponent;
        num = poly::mul_trunc(&num, &poly::pow_trunc(&ls.num, e, s), s);
        den = poly::mul_trunc(&den, &poly::pow_trunc(&ls.den, e, s), s);
        scale *= ls.scale.pow(e as i32);
        v += (ls.pole * e) as usize;
    }
    // R(t)(t+k)^s = scale · num/den · h^{s−v}, so a_{i,k} = scale · q_{v−i}
    let q = poly::div_trunc(&num, &den, v.max(1));
    (1..=s)
        .map(|i| {
            if i <= v {
                &scale * &q[v - i]
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

/// Exact partial-fraction table of `inst`, one pole at a time.
pub fn partial_fractions(inst: &RationalFunctionInstance) -> Result<PartialFractionTable> {
    if inst.degree() > -2 {
        return Err(Error::PreconditionViolation(format!(
            "deg R_n = {} > -2",
            inst.degree()
        )));
    }
    let p = &inst.params;
    let s = p.s as usize;
    let (lo, hi) = inst.pole_range();
    let rows: Vec<Vec<BigRational>> = (lo..=hi)
        .into_par_iter()
        .map(|k| pole_coefficients(inst, k, s))
        .collect();
    Ok(PartialFractionTable {
        n: inst.n,
        s: p.s,
        m: p.m,
        delta1: p.delta1(),
        k_lo: lo,
        rows,
    })
}

impl PartialFractionTable {
    pub fn k_range(&self) -> (i64, i64) {
        (self.k_lo, self.k_lo + self.rows.len() as i64 - 1)
    }

    /// `a_{n,i,k}`; zero outside the stored range.
    pub fn get(&self, i: u64, k: i64) -> BigRational {
        let (lo, hi) = self.k_range();
        if i == 0 || i > self.s || k < lo || k > hi {
            return BigRational::zero();
        }
        self.rows[(k - lo) as usize][i as usize - 1].clone()
    }

    /// `(i, k, a_{n,i,k})` for every stored entry, ordered by `k` then `i`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, i64, &BigRational)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(dk, row)| {
            row.iter()
                .enumerate()
                .map(move |(di, a)| (di as u64 + 1, self.k_lo + dk as i64, a))
        })
    }

    /// `Σ_{i,k} a_{n,i,k}/(t+k)^i`.
    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.entries()
            .filter(|(_, _, a)| !a.is_zero())
            .map(|(i, k, a)| a / (t + BigInt::from(k)).pow(i as i32))
            .sum()
    }

    /// Entries breaking `a_{i,k} = (−1)^{i+1} a_{i,Mn−k}`.
    pub fn symmetry_violations(&self) -> Vec<(u64, i64)> {
        let mn = (self.m * self.n) as i64;
        self.entries()
            .filter(|&(i, k, a)| {
                let mirror = self.get(i, mn - k);
                if i % 2 == 1 {
                    *a != mirror
                } else {
                    *a != -mirror
                }
            })
            .map(|(i, k, _)| (i, k))
            .collect()
    }

    /// Non-zero entries outside `[δ_{j*}n, (M−δ_{j*})n]` with `j* = ⌈iJ/s⌉`.
    pub fn support_violations(&self, p: &ParamSet) -> Vec<(u64, i64)> {
        self.entries()
            .filter(|&(i, k, a)| {
                let d = p.deltas[p.j_star(i) as usize - 1];
                !a.is_zero() && (k < (d * self.n) as i64 || k > ((p.m - d) * self.n) as i64)
            })
            .map(|(i, k, _)| (i, k))
            .collect()
    }

    /// One `i k numerator denominator` line per non-zero entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, k, a) in self.entries().filter(|(_, _, a)| !a.is_zero()) {
            out.push_str(&format!("{i} {k} {} {}\n", a.numer(), a.denom()));
        }
        out
    }
}

/// `ρ_{n,0}, …, ρ_{n,s}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rho {
    #[serde(serialize_with = "ser_rationals")]
    pub values: Vec<BigRational>,
}

fn ser_rationals<S: serde::Serializer>(
    v: &[BigRational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

impl Rho {
    pub fn get(&self, i: usize) -> &BigRational {
        &self.values[i]
    }

    /// Indices that may be non-zero: 0 and the odd `i ≥ 3`.
    pub fn active_indices(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain((3..self.values.len()).step_by(2))
            .collect()
    }
}

/// `ρ_i = Σ_k a_{i,k}` and `ρ_0 = −Σ_{i,k} a_{i,k} H_k^{(i)}`.
///
/// Fails if `ρ_1` or any even-index `ρ_i` is non-zero, which the symmetry of
/// `R_n` rules out.
pub fn rho_coefficients(table: &PartialFractionTable) -> Result<Rho> {
    let rho = rho_unchecked(table);
    for (i, v) in rho.values.iter().enumerate().skip(1) {
        if (i == 1 || i % 2 == 0) && !v.is_zero() {
            return Err(Error::SymmetryViolation(format!("rho_{i} = {v}")));
        }
    }
    Ok(rho)
}

pub(crate) fn rho_unchecked(table: &PartialFractionTable) -> Rho {
    let s = table.s as usize;
    let (_, hi) = table.k_range();
    let mut values = vec![BigRational::zero(); s + 1];
    for i in 1..=s {
        let h = generalized_harmonic(i as u32, hi.max(0) as u64);
        for (_, k, a) in table
            .entries()
            .filter(|&(ii, _, a)| ii as usize == i && !a.is_zero())
        {
            values[i] += a;
            values[0] -= a * &h[k as usize];
        }
    }
    Rho { values }
}

#[cfg(test)]
mod tests {
    use super::super::build_instance;
    use super::*;
    use crate::kernel::ratio;

    fn table(n: u64) -> (ParamSet, RationalFunctionInstance, PartialFractionTable) {
        let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
        let inst = build_instance(&p, n).unwrap();
        let t = partial_fractions(&inst).unwrap();
        (p, inst, t)
    }

    #[test]
    fn reconstruction_is_exact() {
        let (_, inst, t) = table(2);
        for (a, b) in [(1i64, 2i64), (-1, 3), (7, 5), (-25, 4), (31, 1), (-13, 1)] {
            let x = ratio(a, b);
            assert_eq!(t.eval(&x), inst.eval(&x).unwrap(), "t = {x}");
        }
    }

    #[test]
    fn symmetry_and_support() {
        for n in 1..=3 {
            let (p, _, t) = table(n);
            assert!(t.symmetry_violations().is_empty());
            assert!(t.support_violations(&p).is_empty());
            // i = 4 needs both bricks, so k = 0 (only the δ = 0 brick) has no i = 4 term
            assert!(t.get(4, 0).is_zero());
            assert!(!t.get(2, 0).is_zero());
        }
    }

    #[test]
    fn rho_vanishing() {
        let (_, _, t) = table(3);
        let rho = rho_coefficients(&t).unwrap();
        assert!(rho.get(1).is_zero() && rho.get(2).is_zero() && rho.get(4).is_zero());
        assert!(!rho.get(3).is_zero());
        assert_eq!(rho.active_indices(), vec![0, 3]);
    }

    #[test]
    fn brick_order_does_not_matter() {
        let (_, inst, t) = table(2);
        let mut order: Vec<usize> = (0..inst.bricks.len()).collect();
        order.reverse();
        order.swap(0, 3);
        let t2 = partial_fractions(&inst.with_brick_order(&order)).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn text_export() {
        let (_, _, t) = table(1);
        let text = t.to_text();
        let first = text.lines().next().unwrap();
        assert!(
            first.starts_with("1 0 ") || first.starts_with("2 0 "),
            "{first}"
        );
        assert_eq!(
            text.lines().count(),
            t.entries().filter(|e| !e.2.is_zero()).count()
        );
    }
}
