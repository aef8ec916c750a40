//! Elementary bricks: `2t + c`, `(t+a)_m/m!` and `(b−a)!/(t+a)_{b−a+1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::poly;
use crate::kernel::factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BrickKind {
    /// `2t + constant`.
    Linear { constant: i64 },
    /// `(t + offset)_length / length!`.
    Numerator { offset: i64, length: u64 },
    /// `(end − start)! / (t + start)_{end − start + 1}`, with `0 ≤ start ≤ end`.
    Denominator { start: u64, end: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Brick {
    pub kind: BrickKind,
    pub exponent: u32,
}

/// A brick near `t = −k`, written in `h = t + k` as `scale · num(h)/den(h) · h^{−pole}`
/// with integer series `num`, `den` and `den(0) ≠ 0`.
#[derive(Debug, Clone)]
pub(crate) struct LocalSeries {
    pub scale: BigRational,
    pub num: Vec<BigInt>,
    pub den: Vec<BigInt>,
    pub pole: u32,
}

impl Brick {
    pub fn new(kind: BrickKind, exponent: u32) -> Self {
        if let BrickKind::Denominator { start, end } = kind {
            assert!(start <= end, "denominator brick needs start <= end");
        }
        assert!(exponent >= 1);
        Brick { kind, exponent }
    }

    /// Value of one copy of the brick at `t` (ignoring the exponent), `None` at a pole.
    pub fn eval(&self, t: &BigRational) -> Option<BigRational> {
        match self.kind {
            BrickKind::Linear { constant } => Some(t * BigInt::from(2) + BigInt::from(constant)),
            BrickKind::Numerator { offset, length } => {
                let mut acc = BigRational::one();
                for i in 0..length as i64 {
                    acc *= t + BigInt::from(offset + i);
                }
                Some(acc / factorial(length))
            }
            BrickKind::Denominator { start, end } => {
                let mut acc = BigRational::one();
                for i in start..=end {
                    let f = t + BigInt::from(i);
                    if f.is_zero() {
                        return None;
                    }
                    acc *= f;
                }
                Some(BigRational::from_integer(factorial(end - start)) / acc)
            }
        }
    }

    /// Degree in `t` of one copy.
    pub fn degree(&self) -> i64 {
        match self.kind {
            BrickKind::Linear { .. } => 1,
            BrickKind::Numerator { length, .. } => length as i64,
            BrickKind::Denominator { start, end } => -((end - start + 1) as i64),
        }
    }

    /// Order of the pole of one copy at `t = −k`.
    pub fn pole_order(&self, k: i64) -> u32 {
        match self.kind {
            BrickKind::Denominator { start, end } => (start as i64 <= k && k <= end as i64) as u32,
            _ => 0,
        }
    }

    /// Expansion of one copy around `t = −k`, truncated to `len` terms.
    pub(crate) fn local_series(&self, k: i64, len: usize) -> LocalSeries {
        let mut num = poly::one(len);
        let mut den = poly::one(len);
        let mut scale = BigRational::one();
        let mut pole = 0;
        match self.kind {
            BrickKind::Linear { constant } => {
                num = vec![BigInt::zero(); len];
                if len > 0 {
                    num[0] = BigInt::from(constant - 2 * k);
                }
                if len > 1 {
                    num[1] = BigInt::from(2);
                }
            }
            BrickKind::Numerator { offset, length } => {
                for i in 0..length as i64 {
                    poly::mul_linear(&mut num, &BigInt::from(offset + i - k));
                }
                scale = BigRational::new(BigInt::one(), factorial(length));
            }
            BrickKind::Denominator { start, end } => {
                for i in start as i64..=end as i64 {
                    if i == k {
                        pole = 1;
                    } else {
                        poly::mul_linear(&mut den, &BigInt::from(i - k));
                    }
                }
                scale = BigRational::from_integer(factorial(end - start));
            }
        }
        LocalSeries {
            scale,
            num,
            den,
            pole,
        }
    }
}
