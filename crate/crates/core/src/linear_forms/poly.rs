//! Truncated power series in `h` with integer or rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// `a·b mod h^len`.
pub(crate) fn mul_trunc(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a·(h + c) mod h^len`, in place.
pub(crate) fn mul_linear(a: &mut [BigInt], c: &BigInt) {
    for i in (0..a.len()).rev() {
        let shifted = if i > 0 {
            a[i - 1].clone()
        } else {
            BigInt::zero()
        };
        a[i] = &a[i] * c + shifted;
    }
}

pub(crate) fn pow_trunc(a: &[BigInt], e: u32, len: usize) -> Vec<BigInt> {
    let mut out = one(len);
    for _ in 0..e {
        out = mul_trunc(&out, a, len);
    }
    out
}

pub(crate) fn one(len: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    if len > 0 {
        v[0] = 1.into();
    }
    v
}

/// `num/den mod h^len`; requires `den[0] ≠ 0`.
pub(crate) fn div_trunc(num: &[BigInt], den: &[BigInt], len: usize) -> Vec<BigRational> {
    let d0 = BigRational::from_integer(den[0].clone());
    let mut q: Vec<BigRational> = Vec::with_capacity(len);
    for j in 0..len {
        let mut acc = BigRational::from_integer(num.get(j).cloned().unwrap_or_default());
        for l in 1..=j.min(den.len() - 1) {
            acc -= &q[j - l] * &den[l];
        }
        q.push(acc / &d0);
    }
    q
}
