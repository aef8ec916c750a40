//! Certified logarithm, digamma and zeta values at rational arguments.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::approx::ApproxReal;
use crate::error::{Error, Result};

/// Extra bits carried internally so that accumulated rounding stays below the target.
const GUARD_BITS: u32 = 24;

/// Largest Bernoulli index held in the table (B_0 … B_MAX_BERNOULLI).
const MAX_BERNOULLI: usize = 120;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Exact Bernoulli numbers B_0..B_120 (B_1 = −1/2), computed once.
pub fn bernoulli(k: usize) -> &'static BigRational {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        // Σ_{j=0}^{m} C(m+1, j) B_j = 0 for m ≥ 1
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for m in 1..=MAX_BERNOULLI {
            let mut binom = BigInt::one(); // C(m+1, 0)
            let mut acc = BigRational::zero();
            for (j, bj) in b.iter().enumerate() {
                acc += bj * &binom;
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            // binom is now C(m+1, m)
            b.push(-acc / BigRational::from_integer(binom));
        }
        b
    });
    &table[k]
}

/// `atanh(z)` for rational `|z| ≤ 1/3`, enclosed at `prec` fractional bits.
fn atanh_small(z: &BigRational, prec: u32) -> ApproxReal {
    debug_assert!(z.abs() <= rat(1, 3));
    if z.is_zero() {
        return ApproxReal::zero(prec);
    }
    let w = prec + 16;
    let zr = ApproxReal::from_rational(z, w);
    let z2 = ApproxReal::from_rational(&(z * z), w);
    let mut pow = zr.clone();
    let mut sum = zr;
    let mut j: i64 = 0;
    loop {
        pow = &pow * &z2;
        j += 1;
        sum = &sum + &pow.div_int(2 * j + 1);
        // the radius never drops below one unit, so stop on a few units of magnitude
        if pow.abs_upper_scaled() <= BigInt::from(8) {
            let mag = pow.upper().abs().max(pow.lower().abs());
            // tail Σ_{i>j} |z|^{2i+1}/(2i+1) ≤ |z|^{2j+3} / (1 − z²) ≤ |pow|·z²·9/8
            sum.add_error(&(mag * z * z * rat(9, 8)));
            break;
        }
    }
    sum.with_precision(prec)
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(q: &BigRational, prec: u32) -> Result<ApproxReal> {
    if !q.is_positive() {
        return Err(Error::NonPositiveArgument(q.to_string()));
    }
    let w = prec + GUARD_BITS;
    // q = 2^k · m with m ∈ [1/2, 2)
    let k = q.numer().bits() as i64 - q.denom().bits() as i64;
    let m = if k >= 0 {
        q / BigRational::from_integer(BigInt::one() << k as u64)
    } else {
        q * BigRational::from_integer(BigInt::one() << (-k) as u64)
    };
    let z = (&m - BigRational::one()) / (&m + BigRational::one());
    let mut out = atanh_small(&z, w).mul_int(2);
    if k != 0 {
        out = &out + &ln2(w).mul_int(k);
    }
    Ok(out)
}

/// ln 2 = 2·atanh(1/3), carried at `prec + 4` bits so the bound stays below 2^-prec.
pub fn ln2(prec: u32) -> ApproxReal {
    atanh_small(&rat(1, 3), prec + 4).mul_int(2)
}

/// Natural logarithm of an interval (monotone, evaluated at both endpoints).
pub fn ln_approx(x: &ApproxReal) -> Result<ApproxReal> {
    let lo = x.lower();
    if !lo.is_positive() {
        return Err(Error::NonPositiveArgument(format!("{x}")));
    }
    let p = x.precision_bits();
    if x.is_exact() {
        return ln_rational(&lo, p);
    }
    let l = ln_rational(&lo, p)?;
    let h = ln_rational(&x.upper(), p)?;
    Ok(ApproxReal::from_bounds(
        &l.lower(),
        &h.upper(),
        p + GUARD_BITS,
    ))
}

/// Chooses the number of Bernoulli terms and the shift threshold for the
/// digamma asymptotic series so that the first omitted term is below 2^-bits.
/// At least 8 terms and a threshold of at least 16 are always used.
fn digamma_plan(bits: u32) -> (usize, u64) {
    let mut best: Option<(f64, usize, u64)> = None;
    for k in 8..=(MAX_BERNOULLI / 2 - 1) {
        let b = bernoulli(2 * k + 2);
        let log2_b = big_log2(b.numer().abs()) - big_log2(b.denom().clone());
        // |B_{2k+2}| / ((2k+2) T^{2k+2}) ≤ 2^-bits
        let need = (log2_b - ((2 * k + 2) as f64).log2() + bits as f64 + 1.0) / (2 * k + 2) as f64;
        let t = 2f64.powf(need).ceil().max(16.0) as u64;
        let cost = t as f64 + 3.0 * k as f64;
        if best.is_none_or(|(c, _, _)| cost < c) {
            best = Some((cost, k, t));
        }
    }
    let (_, k, t) = best.expect("non-empty plan");
    (k, t)
}

fn big_log2(x: BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 60 {
        return (x.to_string().parse::<f64>().unwrap_or(1.0)).log2();
    }
    let top: BigInt = &x >> (bits - 60);
    top.to_string().parse::<f64>().unwrap_or(1.0).log2() + (bits - 60) as f64
}

/// Digamma ψ(x) for rational `x > 0`, with error bound ≤ 2^-prec.
///
/// Shifts the argument up with ψ(x) = ψ(x+N) − Σ_{m<N} 1/(x+m), then applies
/// ψ(y) ~ ln y − 1/(2y) − Σ_{k=1}^{K} B_{2k}/(2k y^{2k}); the remainder of this
/// enveloping series is bounded by the first omitted term.
pub fn digamma(x: &BigRational, prec: u32) -> Result<ApproxReal> {
    if !x.is_positive() {
        return Err(Error::NonPositiveArgument(x.to_string()));
    }
    let w = prec + GUARD_BITS;
    let (k_terms, threshold) = digamma_plan(w);
    let thr = BigRational::from_integer(threshold.into());
    let mut y = x.clone();
    let mut shift_sum = ApproxReal::zero(w);
    while y < thr {
        shift_sum = &shift_sum + &ApproxReal::from_rational(&y.recip(), w);
        y += BigRational::one();
    }
    let mut acc = ln_rational(&y, w)?;
    acc = &acc - &ApproxReal::from_rational(&(y.recip() / BigRational::from_integer(2.into())), w);
    // Σ_{k=1}^{K} B_{2k}/(2k)·y^{−2k} exactly, by Horner in y^{−2}; the large
    // Bernoulli numbers would otherwise amplify rounding in the powers
    let inv_y2 = (&y * &y).recip();
    let mut series = BigRational::zero();
    for k in (1..=k_terms).rev() {
        series = (series + bernoulli(2 * k) / BigRational::from_integer((2 * k).into())) * &inv_y2;
    }
    acc = &acc - &ApproxReal::from_rational(&series, w);
    let pow = inv_y2.pow(k_terms as i32);
    let omitted = bernoulli(2 * k_terms + 2).abs()
        / BigRational::from_integer((2 * k_terms + 2).into())
        * (&pow * &inv_y2);
    acc.add_error(&omitted);
    Ok((&acc - &shift_sum).with_precision(w))
}

/// ζ(s) for integer `s ≥ 2` by Euler–Maclaurin summation with an explicit remainder bound.
pub fn zeta_value(s: u32, prec: u32) -> Result<ApproxReal> {
    if s < 2 {
        return Err(Error::ArgumentTooSmall(format!(
            "zeta needs s >= 2, got {s}"
        )));
    }
    let w = prec + GUARD_BITS;
    let target = BigRational::new(BigInt::one(), BigInt::one() << (w + 2));
    let mut n: u64 = 16.max(w as u64 / 6);
    loop {
        if let Some(v) = zeta_em(s, n, w, &target) {
            return Ok(v);
        }
        n *= 2;
    }
}

fn zeta_em(s: u32, n: u64, w: u32, target: &BigRational) -> Option<ApproxReal> {
    let big_n = BigRational::from_integer(n.into());
    let n_pow_s = big_n.pow(s as i32);
    let mut acc = ApproxReal::zero(w);
    for k in 1..n {
        let term = BigRational::new(BigInt::one(), BigInt::from(k).pow(s));
        acc = &acc + &ApproxReal::from_rational(&term, w);
    }
    // N^{1-s}/(s-1) + N^{-s}/2
    let head = &big_n / (&n_pow_s * BigRational::from_integer((s - 1).into()))
        + (&n_pow_s * BigRational::from_integer(2.into())).recip();
    acc = &acc + &ApproxReal::from_rational(&head, w);
    // T_j = B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = BigRational::from_integer(s.into()); // s(s+1)…(s+2j−2)
    let mut fact = BigRational::from_integer(2.into()); // (2j)!
    let mut n_pow = &n_pow_s * &big_n; // N^{s+2j−1}
    let mut j = 1usize;
    loop {
        let term = bernoulli(2 * j) * &rising / (&fact * &n_pow);
        // next term, used as the remainder bound if we stop here
        let next_rising = &rising
            * BigRational::from_integer((s as usize + 2 * j - 1).into())
            * BigRational::from_integer((s as usize + 2 * j).into());
        let next_fact = &fact * BigRational::from_integer(((2 * j + 1) * (2 * j + 2)).into());
        let next_pow = &n_pow * &big_n * &big_n;
        let next = bernoulli(2 * j + 2) * &next_rising / (&next_fact * &next_pow);
        acc = &acc + &ApproxReal::from_rational(&term, w);
        if next.abs() <= *target {
            acc.add_error(&next);
            return Some(acc);
        }
        if 2 * j + 2 >= MAX_BERNOULLI || next.abs() >= term.abs() {
            return None;
        }
        rising = next_rising;
        fact = next_fact;
        n_pow = next_pow;
        j += 1;
    }
}

/// Harmonic-type sums H_k^{(i)} = Σ_{ℓ=1}^{k} ℓ^{-i} for k = 0..=kmax.
pub fn generalized_harmonic(i: u32, kmax: u64) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut acc = BigRational::zero();
    out.push(acc.clone());
    for l in 1..=kmax {
        acc += BigRational::new(BigInt::one(), BigInt::from(l).pow(i));
        out.push(acc.clone());
    }
    out
}

/// Reduces `a/b` and reports whether it is an integer.
pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}
