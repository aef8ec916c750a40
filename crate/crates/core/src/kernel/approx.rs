//! Binary fixed-point reals with a rigorous absolute error radius.
//!
//! An [`ApproxReal`] stores a midpoint `mid · 2^-p` and a radius `rad · 2^-p`
//! (both integers, `rad ≥ 0`); the true value is guaranteed to lie in the
//! closed interval `[mid − rad, mid + rad] · 2^-p`. Every operation rounds
//! the midpoint and widens the radius so the enclosure is preserved.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ApproxReal {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

/// `ceil(n / d)` for `d > 0`.
fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_mod_floor(d);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

impl ApproxReal {
    pub fn zero(prec: u32) -> Self {
        Self {
            mid: BigInt::zero(),
            rad: BigInt::zero(),
            prec,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T, prec: u32) -> Self {
        Self {
            mid: v.into() << prec,
            rad: BigInt::zero(),
            prec,
        }
    }

    /// Rounds `q` to the nearest-below grid point; radius 0 when exact.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let num = q.numer() << prec;
        let (mid, rem) = num.div_mod_floor(q.denom());
        let rad = if rem.is_zero() {
            BigInt::zero()
        } else {
            BigInt::one()
        };
        Self { mid, rad, prec }
    }

    /// Builds an enclosure from explicit rational bounds `lo ≤ hi`.
    pub fn from_bounds(lo: &BigRational, hi: &BigRational, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        let lo_s = (lo.numer() << prec).div_floor(lo.denom());
        let hi_s = div_ceil(&(hi.numer() << prec), hi.denom());
        let sum = &lo_s + &hi_s;
        let mid = sum.div_floor(&BigInt::from(2));
        let rad = (&hi_s - &mid).max(&mid - &lo_s);
        Self { mid, rad, prec }
    }

    /// Rebuilds a value from [`Self::mid_scaled`], [`Self::rad_scaled`] and the precision.
    pub fn from_scaled(mid: BigInt, rad: BigInt, prec: u32) -> Self {
        assert!(!rad.is_negative(), "radius must be non-negative");
        Self { mid, rad, prec }
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    /// Scaled midpoint numerator (value = mid · 2^-prec).
    pub fn mid_scaled(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_scaled(&self) -> &BigInt {
        &self.rad
    }

    fn scale(&self) -> BigInt {
        BigInt::one() << self.prec
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.mid.clone(), self.scale())
    }

    pub fn error_bound(&self) -> BigRational {
        BigRational::new(self.rad.clone(), self.scale())
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(&self.mid - &self.rad, self.scale())
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(&self.mid + &self.rad, self.scale())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value())
    }

    pub fn error_f64(&self) -> f64 {
        ratio_to_f64(&self.error_bound())
    }

    pub fn lower_f64(&self) -> f64 {
        ratio_to_f64(&self.lower())
    }

    pub fn upper_f64(&self) -> f64 {
        ratio_to_f64(&self.upper())
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mid > self.rad
    }

    pub fn is_negative(&self) -> bool {
        -&self.mid > self.rad
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lower() <= q && q <= &self.upper()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(q) => self.contains(&q),
            None => false,
        }
    }

    /// True when `other`'s interval lies inside this one.
    pub fn encloses(&self, other: &ApproxReal) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &ApproxReal) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Widens the radius by an absolute amount `e ≥ 0`.
    pub fn add_error(&mut self, e: &BigRational) {
        let e = e.abs();
        let scaled = div_ceil(&(e.numer() << self.prec), e.denom());
        self.rad += scaled;
    }

    /// Re-expresses at another precision, rounding outward when bits are dropped.
    pub fn with_precision(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = prec - self.prec;
                Self {
                    mid: &self.mid << d,
                    rad: &self.rad << d,
                    prec,
                }
            }
            Ordering::Less => {
                let d = self.prec - prec;
                let den = BigInt::one() << d;
                let (mid, rem) = self.mid.div_mod_floor(&den);
                let mut rad = div_ceil(&self.rad, &den);
                if !rem.is_zero() {
                    rad += 1;
                }
                Self { mid, rad, prec }
            }
        }
    }

    fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let p = a.prec.max(b.prec);
        (a.with_precision(p), b.with_precision(p))
    }

    pub fn abs_upper_scaled(&self) -> BigInt {
        self.mid.abs() + &self.rad
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self {
            mid: &self.mid * k,
            rad: &self.rad * k.unsigned_abs(),
            prec: self.prec,
        }
    }

    pub fn mul_bigint(&self, k: &BigInt) -> Self {
        Self {
            mid: &self.mid * k,
            rad: &self.rad * k.abs(),
            prec: self.prec,
        }
    }

    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero");
        let d = BigInt::from(k);
        let (mid, rem) = self.mid.div_mod_floor(&d);
        let mut rad = div_ceil(&self.rad, &d.abs());
        if !rem.is_zero() {
            rad += 1;
        }
        Self {
            mid,
            rad,
            prec: self.prec,
        }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        let num = &self.mid * q.numer();
        let (mid, rem) = num.div_mod_floor(q.denom());
        let mut rad = div_ceil(&(&self.rad * q.numer().abs()), q.denom());
        if !rem.is_zero() {
            rad += 1;
        }
        Self {
            mid,
            rad,
            prec: self.prec,
        }
    }

    pub fn add_rational(&self, q: &BigRational) -> Self {
        self + &ApproxReal::from_rational(q, self.prec)
    }

    pub fn checked_div(&self, other: &ApproxReal) -> Result<Self> {
        let (a, b) = Self::aligned(self, other);
        let bm_abs = b.mid.abs();
        if bm_abs <= b.rad {
            return Err(Error::DivisionByInterval);
        }
        let p = a.prec;
        let (mid, rem) = (&a.mid << p).div_mod_floor(&b.mid);
        // |a/b − am/bm| ≤ (ra|bm| + |am| rb) / ((|bm| − rb)|bm|), scaled by 2^p.
        let num = (&a.rad * &bm_abs + a.mid.abs() * &b.rad) << p;
        let den = (&bm_abs - &b.rad) * &bm_abs;
        let mut rad = div_ceil(&num, &den);
        if !rem.is_zero() {
            rad += 1;
        }
        Ok(Self { mid, rad, prec: p })
    }

    pub fn recip(&self) -> Result<Self> {
        ApproxReal::from_int(1, self.prec).checked_div(self)
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        rational_to_decimal(&self.value(), digits)
    }

    /// Number of decimal digits that are meaningful given the radius.
    fn sensible_digits(&self) -> usize {
        if self.rad.is_zero() {
            return 12.min((self.prec as f64 * std::f64::consts::LOG10_2) as usize);
        }
        let e = self.error_f64();
        if e <= 0.0 || !e.is_finite() {
            return 12;
        }
        ((-e.log10()).floor().max(0.0) as usize).clamp(1, 60)
    }
}

pub(crate) fn ratio_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large components: shift both down to keep ~60 significant bits.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0) as usize;
    let shift_d = (db - 60).max(0) as usize;
    let n = (q.numer() >> shift_n).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// Rounds `q` to `digits` decimal places (half away from zero) and renders it.
pub fn rational_to_decimal(q: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = q * BigRational::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = (abs + half).floor().to_integer();
    let (int, frac) = rounded.div_rem(&scale);
    let sign = if neg && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

impl fmt::Display for ApproxReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.sensible_digits());
        write!(f, "{} ± {:.3e}", self.to_decimal(digits), self.error_f64())
    }
}

impl Serialize for ApproxReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let digits = self.sensible_digits().max(6);
        let mut st = s.serialize_struct("ApproxReal", 5)?;
        st.serialize_field("value", &self.to_decimal(digits))?;
        st.serialize_field("error_bound", &format!("{:.6e}", self.error_f64()))?;
        st.serialize_field("lower", &rational_to_decimal(&self.lower(), digits + 2))?;
        st.serialize_field("upper", &rational_to_decimal(&self.upper(), digits + 2))?;
        st.serialize_field("precision_bits", &self.prec)?;
        st.end()
    }
}

impl<'a> Add<&'a ApproxReal> for &'a ApproxReal {
    type Output = ApproxReal;
    fn add(self, rhs: &'a ApproxReal) -> ApproxReal {
        let (a, b) = ApproxReal::aligned(self, rhs);
        ApproxReal {
            mid: a.mid + b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl<'a> Sub<&'a ApproxReal> for &'a ApproxReal {
    type Output = ApproxReal;
    fn sub(self, rhs: &'a ApproxReal) -> ApproxReal {
        let (a, b) = ApproxReal::aligned(self, rhs);
        ApproxReal {
            mid: a.mid - b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl<'a> Mul<&'a ApproxReal> for &'a ApproxReal {
    type Output = ApproxReal;
    fn mul(self, rhs: &'a ApproxReal) -> ApproxReal {
        let (a, b) = ApproxReal::aligned(self, rhs);
        let p = a.prec;
        let den = BigInt::one() << p;
        let (mid, rem) = (&a.mid * &b.mid).div_mod_floor(&den);
        let err = a.mid.abs() * &b.rad + b.mid.abs() * &a.rad + &a.rad * &b.rad;
        let mut rad = div_ceil(&err, &den);
        if !rem.is_zero() {
            rad += 1;
        }
        ApproxReal { mid, rad, prec: p }
    }
}

impl Neg for &ApproxReal {
    type Output = ApproxReal;
    fn neg(self) -> ApproxReal {
        ApproxReal {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ApproxReal> for ApproxReal {
            type Output = ApproxReal;
            fn $m(self, rhs: ApproxReal) -> ApproxReal {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ApproxReal> for ApproxReal {
            type Output = ApproxReal;
            fn $m(self, rhs: &'a ApproxReal) -> ApproxReal {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ApproxReal {
    type Output = ApproxReal;
    fn neg(self) -> ApproxReal {
        -&self
    }
}

impl std::iter::Sum for ApproxReal {
    fn sum<I: Iterator<Item = ApproxReal>>(iter: I) -> ApproxReal {
        let mut acc: Option<ApproxReal> = None;
        for x in iter {
            acc = Some(match acc {
                None => x,
                Some(a) => a + x,
            });
        }
        acc.unwrap_or_else(|| ApproxReal::zero(0))
    }
}
