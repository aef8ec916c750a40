//! `S_n = Σ_{ν≥1} R_n(ν)` with a certified tail, and its expansion in `ζ` values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{BrickKind, RationalFunctionInstance, Rho};
use crate::error::{Error, Result};
use crate::kernel::{factorial, zeta_value, ApproxReal};

/// `S_n`, its coefficients `ρ_{n,i}` and the common factor `Φ_n`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFormValue {
    pub rho: Rho,
    pub s: ApproxReal,
    #[serde(serialize_with = "ser_bigint")]
    pub phi: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `c` with `|R_n(t)| ≤ c · t^{deg}` for all `t ≥ big_n > 0`.
///
/// Each factor `t + a` is at most `t(1 + |a|/N)`, `2t + c` at most
/// `2t(1 + |c|/2N)`, and each denominator factor `t + i` with `i ≥ 0` is at least `t`.
fn tail_constant(inst: &RationalFunctionInstance, big_n: &BigRational) -> BigRational {
    let mut c = inst.normalization.abs();
    for b in &inst.bricks {
        let mut one = BigRational::one();
        match b.kind {
            BrickKind::Linear { constant } => {
                one *= BigRational::from_integer(2.into())
                    * (BigRational::one()
                        + BigRational::from_integer(constant.abs().into())
                            / (big_n * BigInt::from(2)));
            }
            BrickKind::Numerator { offset, length } => {
                for i in 0..length as i64 {
                    one *= BigRational::one()
                        + BigRational::from_integer((offset + i).abs().into()) / big_n;
                }
                one /= factorial(length);
            }
            BrickKind::Denominator { start, end } => {
                one *= factorial(end - start);
            }
        }
        c *= one.pow(b.exponent as i32);
    }
    c
}

/// `S_n` enclosed to within `2^-prec`.
///
/// The terms `ν ≤ rn` vanish; the partial sum up to `N` is exact and the tail
/// `Σ_{ν>N} |R_n(ν)| ≤ c·N^{1−d}/(d−1)` with `d = −deg R_n ≥ 2`.
pub fn series_sn(inst: &RationalFunctionInstance, prec: u32) -> Result<ApproxReal> {
    let d = -inst.degree();
    if d < 2 {
        return Err(Error::PreconditionViolation(format!(
            "deg R_n = {} > -2",
            -d
        )));
    }
    let start = (inst.params.r * inst.n) as i64 + 1;
    let target = BigRational::new(BigInt::one(), BigInt::one() << (prec + 4));
    let mut big_n = start.max(16);
    let tail = loop {
        let nn = BigRational::from_integer(big_n.into());
        let t = tail_constant(inst, &nn) / (nn.pow((d - 1) as i32) * BigInt::from(d - 1));
        if t < target {
            break t;
        }
        big_n *= 2;
    };
    let mut sum = BigRational::zero();
    for nu in start..=big_n {
        sum += inst
            .eval(&BigRational::from_integer(nu.into()))
            .expect("no poles at positive integers");
    }
    let mut out = ApproxReal::from_rational(&sum, prec + 4);
    out.add_error(&tail);
    Ok(out)
}

/// `S_n − ρ₀ − Σ_{i≥2} ρ_i ζ(i)`, which must enclose zero.
pub fn expansion_residual(s_n: &ApproxReal, rho: &Rho, prec: u32) -> Result<ApproxReal> {
    let mut acc = s_n.add_rational(&-rho.get(0));
    for i in 2..rho.values.len() {
        if rho.get(i).is_zero() {
            continue;
        }
        let z = zeta_value(i as u32, prec + 8 + rho.get(i).abs().numer().bits() as u32)?;
        acc = &acc - &z.mul_rational(rho.get(i));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::{build_instance, partial_fractions, rho_coefficients};
    use super::*;
    use crate::params::ParamSet;

    #[test]
    fn linear_form_consistency() {
        let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
        for n in 1..=3 {
            let inst = build_instance(&p, n).unwrap();
            let rho = rho_coefficients(&partial_fractions(&inst).unwrap()).unwrap();
            let s = series_sn(&inst, 128).unwrap();
            assert!(s.error_f64() < 2f64.powi(-128));
            let res = expansion_residual(&s, &rho, 128).unwrap();
            assert!(res.contains(&BigRational::zero()), "n = {n}: {res}");
            assert!(res.error_f64() < 2f64.powi(-100));
        }
    }

    #[test]
    fn precision_doubling_nests() {
        let inst = build_instance(&ParamSet::new(6, vec![0, 1], 4).with_r(2), 2).unwrap();
        let lo = series_sn(&inst, 64).unwrap();
        let hi = series_sn(&inst, 128).unwrap();
        assert!(lo.overlaps(&hi) && hi.error_bound() < lo.error_bound());
        assert!(hi.is_positive() == lo.is_positive());
    }
}
