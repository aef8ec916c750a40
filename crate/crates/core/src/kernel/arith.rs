//! Integer utilities: lcm(1..m), prime sieving, p-adic valuations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `D_m = lcm(1, 2, …, m)`, built as the product of the largest prime powers `≤ m`.
pub fn lcm_upto(m: u64) -> BigInt {
    let mut acc = BigInt::one();
    for p in sieve(m) {
        let mut pk = p;
        while pk <= m / p {
            pk *= p;
        }
        acc *= BigInt::from(pk);
    }
    acc
}

/// All primes `≤ n`, ascending.
pub fn sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes `p` with `lo < p ≤ hi`.
pub fn primes_in(lo: f64, hi: f64) -> Vec<u64> {
    if hi < 2.0 {
        return Vec::new();
    }
    sieve(hi.floor() as u64)
        .into_iter()
        .filter(|&p| (p as f64) > lo)
        .collect()
}

/// Primes `p` with `p² > a` and `p ≤ hi`, i.e. the exact form of `√a < p ≤ hi`.
pub fn primes_above_sqrt(a: u64, hi: u64) -> Vec<u64> {
    sieve(hi)
        .into_iter()
        .filter(|&p| (p as u128) * (p as u128) > a as u128)
        .collect()
}

/// Multiplicity of `p` in the non-zero integer `x`.
pub fn int_valuation(x: &BigInt, p: u64) -> u64 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// `v_p(x) = v_p(numerator) − v_p(denominator)`.
pub fn p_adic_valuation(x: &BigRational, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(int_valuation(x.numer(), p) as i64 - int_valuation(x.denom(), p) as i64)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Prime factorisation of a positive integer by trial division with the given primes.
/// Returns the factors found and the unfactored cofactor.
pub fn factor_with(x: &BigInt, primes: &[u64]) -> (Vec<(u64, u64)>, BigInt) {
    let mut rest = x.clone();
    let mut out = Vec::new();
    for &p in primes {
        if rest.is_one() {
            break;
        }
        let bp = BigInt::from(p);
        let mut v = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rest = q;
            v += 1;
        }
        if v > 0 {
            out.push((p, v));
        }
    }
    (out, rest)
}
