//! The rational function `R_n(t)` as a product of elementary bricks, its
//! partial-fraction table, the coefficients `ρ_{n,i}`, the series `S_n`, the
//! prime factor `Φ_n`, and exact checks of the arithmetic lemmas.

mod arithmetic;
mod bricks;
mod partial;
mod poly;
mod series;

pub use arithmetic::{
    brick_lemma_checks, phi_factor, phi_prime_floor, verify_arithmetic, verify_arithmetic_with,
    ArithmeticReport, BrickLemmaReport, IntegralityFailure,
};
pub use bricks::{Brick, BrickKind};
pub use partial::{partial_fractions, rho_coefficients, PartialFractionTable, Rho};
pub use series::{expansion_residual, series_sn, LinearFormValue};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::ParamSet;

/// `R_n(t) = F₀ · Π_ν F_{−,ν} F_{+,ν} · Π_j G_j^{s/J}` for one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionInstance {
    pub params: ParamSet,
    pub n: u64,
    pub bricks: Vec<Brick>,
    /// Constant factor in front of the brick product; the bricks carry their
    /// own factorial normalisations, so this is 1 for the standard build.
    pub normalization: BigRational,
}

/// Builds the brick decomposition of `R_n`.
pub fn build_instance(p: &ParamSet, n: u64) -> Result<RationalFunctionInstance> {
    p.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams(vec!["n >= 1".into()]));
    }
    let (m, r) = (p.m as i64, p.r as i64);
    let ni = n as i64;
    let mut bricks = vec![Brick::new(BrickKind::Linear { constant: m * ni }, 1)];
    for nu in 0..r {
        bricks.push(Brick::new(
            BrickKind::Numerator {
                offset: -(r - nu) * ni,
                length: n,
            },
            1,
        ));
        bricks.push(Brick::new(
            BrickKind::Numerator {
                offset: (m + nu) * ni + 1,
                length: n,
            },
            1,
        ));
    }
    for &d in &p.deltas {
        let kind = BrickKind::Denominator {
            start: d * n,
            end: (p.m - d) * n,
        };
        bricks.push(Brick::new(kind, p.e() as u32));
    }
    Ok(RationalFunctionInstance {
        params: p.clone(),
        n,
        bricks,
        normalization: BigRational::one(),
    })
}

impl RationalFunctionInstance {
    /// `R_n(t)`, or `None` at a pole.
    pub fn eval(&self, t: &BigRational) -> Option<BigRational> {
        // every denominator factor is checked before a numerator zero can short-circuit
        let vals: Vec<BigRational> = self
            .bricks
            .iter()
            .map(|b| b.eval(t))
            .collect::<Option<_>>()?;
        if vals.iter().any(Zero::is_zero) {
            return Some(BigRational::zero());
        }
        let mut acc = self.normalization.clone();
        for (b, v) in self.bricks.iter().zip(vals) {
            acc *= v.pow(b.exponent as i32);
        }
        Some(acc)
    }

    /// `deg R_n` in `t`.
    pub fn degree(&self) -> i64 {
        self.bricks
            .iter()
            .map(|b| b.degree() * b.exponent as i64)
            .sum()
    }

    /// Poles `−k` of `R_n` with their orders, ascending in `k`.
    pub fn poles(&self) -> Vec<(i64, u32)> {
        let (lo, hi) = self.pole_range();
        (lo..=hi)
            .map(|k| {
                (
                    k,
                    self.bricks
                        .iter()
                        .map(|b| b.pole_order(k) * b.exponent)
                        .sum(),
                )
            })
            .filter(|&(_, o)| o > 0)
            .collect()
    }

    /// `[δ₁n, (M−δ₁)n]`, the range of `k` covered by the table.
    pub fn pole_range(&self) -> (i64, i64) {
        let p = &self.params;
        (
            (p.delta1() * self.n) as i64,
            ((p.m - p.delta1()) * self.n) as i64,
        )
    }

    /// The same function with its bricks listed in another order.
    pub fn with_brick_order(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.bricks.len());
        let bricks = order.iter().map(|&i| self.bricks[i].clone()).collect();
        RationalFunctionInstance {
            bricks,
            ..self.clone()
        }
    }

    /// `M·n`, the centre of the symmetry `R(−t − Mn) = −R(t)`.
    pub fn mn(&self) -> i64 {
        (self.params.m * self.n) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{factorial, ratio, BigInt};

    fn small() -> ParamSet {
        ParamSet::new(6, vec![0, 1], 4).with_r(2)
    }

    /// Direct evaluation from the defining product, independent of the bricks.
    fn closed_form(p: &ParamSet, n: u64, t: &BigRational) -> BigRational {
        let e = p.e() as i32;
        let poch = |x: &BigRational, len: u64| {
            (0..len).fold(BigRational::one(), |acc, i| acc * (x + BigInt::from(i)))
        };
        let mut pre = BigRational::one();
        for &d in &p.deltas {
            pre *= BigRational::from_integer(factorial((p.m - 2 * d) * n)).pow(e);
        }
        pre /= BigRational::from_integer(factorial(n)).pow(2 * p.r as i32);
        let rn = p.r * n;
        let mn = BigInt::from(p.m * n);
        let mut num = (t * BigInt::from(2) + &mn) * poch(&(t - BigInt::from(rn)), rn);
        num *= poch(&(t + &mn + BigInt::one()), rn);
        let mut den = BigRational::one();
        for &d in &p.deltas {
            den *= poch(&(t + BigInt::from(d * n)), (p.m - 2 * d) * n + 1).pow(e);
        }
        pre * num / den
    }

    #[test]
    fn structure_count() {
        let inst = build_instance(&small(), 1).unwrap();
        let count = |f: fn(&BrickKind) -> bool| inst.bricks.iter().filter(|b| f(&b.kind)).count();
        assert_eq!(count(|k| matches!(k, BrickKind::Linear { .. })), 1);
        assert_eq!(count(|k| matches!(k, BrickKind::Numerator { .. })), 4);
        assert_eq!(count(|k| matches!(k, BrickKind::Denominator { .. })), 2);
        assert!(inst
            .bricks
            .iter()
            .filter(|b| matches!(b.kind, BrickKind::Denominator { .. }))
            .all(|b| b.exponent == 2));
        assert_eq!(inst.normalization, BigRational::one());
        assert_eq!(inst.degree() as i128, small().degree(1));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = ParamSet::new(6, vec![0, 3], 4).with_r(2);
        assert!(matches!(
            build_instance(&bad, 1),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn matches_closed_form_and_symmetry() {
        let p = small();
        for n in 1..=3u64 {
            let inst = build_instance(&p, n).unwrap();
            let t = BigRational::from_integer(BigInt::from(p.r * n + 1));
            assert_eq!(inst.eval(&t).unwrap(), closed_form(&p, n, &t));
            for (a, b) in [(1i64, 3i64), (-7, 2), (5, 11), (-40, 7), (100, 3)] {
                let t = ratio(a, b);
                let v = inst.eval(&t).unwrap();
                assert_eq!(v, closed_form(&p, n, &t));
                let mirror = -&t - BigInt::from(inst.mn());
                assert_eq!(inst.eval(&mirror).unwrap(), -v);
            }
        }
    }

    #[test]
    fn vanishes_before_rn_and_has_poles() {
        let p = small();
        let inst = build_instance(&p, 2).unwrap();
        for nu in 1..=(p.r * 2) as i64 {
            assert!(inst.eval(&ratio(nu, 1)).unwrap().is_zero());
        }
        assert!(inst.eval(&ratio(-3, 1)).is_none());
        let poles = inst.poles();
        assert_eq!(poles.first(), Some(&(0, 2)));
        assert_eq!(poles.iter().find(|&&(k, _)| k == 2), Some(&(2, 4)));
        assert_eq!(poles.len(), 13);
    }
}
