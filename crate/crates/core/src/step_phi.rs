//! The floor-sum step function `φ(x) = min_{0≤y<1} Σ ±⌊c·x + e·y⌋` and its
//! digamma integral `ϖ`.
//!
//! Every term list produced here satisfies `Σ sign·c = 0` over the terms with
//! `e = 0` and the `y`-dependent terms pair up, so the sum is invariant under
//! `x → x + 1`; `φ` is therefore stored on `[0, 1)` only.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{digamma, ApproxReal};
use crate::params::ParamSet;

/// `sign·⌊x_slope·x + y_coeff·y⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloorTerm {
    pub x_slope: i64,
    pub y_coeff: i8,
    pub sign: i8,
}

impl FloorTerm {
    pub fn new(sign: i8, x_slope: i64, y_coeff: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        debug_assert!((-1..=1).contains(&y_coeff));
        FloorTerm {
            x_slope,
            y_coeff,
            sign,
        }
    }

    /// Value at the rational point `(x, y)`.
    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigInt {
        let arg = x * BigInt::from(self.x_slope) + y * BigInt::from(self.y_coeff);
        arg.floor().to_integer() * BigInt::from(self.sign)
    }
}

impl fmt::Display for FloorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { '+' } else { '-' };
        let y = match self.y_coeff {
            1 => " + y",
            -1 => " - y",
            _ => "",
        };
        write!(f, "{s}⌊{}x{y}⌋", self.x_slope)
    }
}

/// The terms of `φ(x, y)` for `p`.
///
/// Each `δ` contributes `⌊(M−2δ)x⌋ − ⌊y − δx⌋ − ⌊(M−δ)x − y⌋`. With numerator
/// bricks enabled the sum gains `⌊rx + y⌋ + ⌊(r+M)x − y⌋ − ⌊y⌋ − ⌊Mx − y⌋`; the
/// companion term `−2r⌊x⌋` vanishes on `[0, 1)` and is omitted.
pub fn phi_terms(p: &ParamSet) -> Vec<FloorTerm> {
    let m = p.m as i64;
    let mut out = Vec::with_capacity(3 * p.deltas.len() + 4);
    for &d in &p.deltas {
        let d = d as i64;
        out.push(FloorTerm::new(1, m - 2 * d, 0));
        out.push(FloorTerm::new(-1, -d, 1));
        out.push(FloorTerm::new(-1, m - d, -1));
    }
    if p.include_numerator_bricks {
        let r = p.r as i64;
        out.push(FloorTerm::new(1, r, 1));
        out.push(FloorTerm::new(1, r + m, -1));
        out.push(FloorTerm::new(-1, 0, 1));
        out.push(FloorTerm::new(-1, m, -1));
    }
    out
}

/// Exact `min_{0≤y<1} Σ sign·⌊c·a/d + e·y⌋` for `x = a/d`, `d > 0`.
///
/// Write `y = ℓ/d + ε`. A term with `e = +1` jumps up by `sign` exactly at the
/// `y` where `c·x + y` hits an integer, i.e. at `ℓ = (−c·a) mod d`. A term with
/// `e = −1` is left-continuous and jumps down by `sign` just after
/// `ℓ = (c·a) mod d`. Sweeping the jump locations visits every value the sum
/// takes on `[0, 1)`: at each location, the point value and the value on the
/// following open interval.
fn min_over_y<T>(terms: &[FloorTerm], a: &T, d: &T) -> T
where
    T: Integer + Clone + From<i64>,
{
    let mut cur = T::zero();
    // (location, change at the point, additional change just after it)
    let mut events: Vec<(T, i64, i64)> = Vec::with_capacity(terms.len());
    for t in terms {
        let c = T::from(t.x_slope);
        let v = (c * a.clone()).div_floor(d);
        if t.sign > 0 {
            cur = cur + v;
        } else {
            cur = cur - v;
        }
        if t.y_coeff == 0 {
            continue;
        }
        let sigma = T::from(-(t.y_coeff as i64) * t.x_slope);
        let loc = (sigma * a.clone()).mod_floor(d);
        if t.y_coeff == 1 {
            if !loc.is_zero() {
                events.push((loc, t.sign as i64, 0));
            }
        } else {
            events.push((loc, 0, -(t.sign as i64)));
        }
    }
    events.sort_by(|x, y| x.0.cmp(&y.0));
    let mut best = cur.clone();
    let mut i = 0;
    while i < events.len() {
        let mut inc = 0i64;
        let mut exc = 0i64;
        let loc = events[i].0.clone();
        while i < events.len() && events[i].0 == loc {
            inc += events[i].1;
            exc += events[i].2;
            i += 1;
        }
        let at_point = cur.clone() + T::from(inc);
        if at_point < best {
            best = at_point;
        }
        cur = cur + T::from(inc + exc);
        if cur < best {
            best = cur.clone();
        }
    }
    best
}

/// `φ(x)` at a rational `x`; the argument is reduced modulo 1.
pub fn phi_at(terms: &[FloorTerm], x: &BigRational) -> i64 {
    let d = x.denom();
    let a = x.numer().mod_floor(d);
    match (a.to_i64(), d.to_i64()) {
        (Some(a), Some(d)) if d < (1 << 40) => phi_at_frac(terms, a, d),
        _ => min_over_y(terms, &a, d).to_i64().expect("φ fits in i64"),
    }
}

/// `φ(a/d)` for `0 ≤ a < d < 2^40`, in fixed-width arithmetic.
pub fn phi_at_frac(terms: &[FloorTerm], a: i64, d: i64) -> i64 {
    min_over_y(terms, &(a as i128), &(d as i128)) as i64
}

/// Integer-valued, right-continuous step function on `[0, 1)`.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`, with `1` closing
/// the last interval. Adjacent values always differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    breakpoints: Vec<BigRational>,
    values: Vec<i64>,
}

/// Reduced fraction `k/q` with `0 ≤ k < q`, ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Frac(i64, i64);

impl Frac {
    fn cmp_value(&self, o: &Frac) -> std::cmp::Ordering {
        (self.0 as i128 * o.1 as i128).cmp(&(o.0 as i128 * self.1 as i128))
    }
}

/// Every `q` such that `φ` can only change at multiples of `1/q`.
///
/// A floor term with constant `y`-dependence changes where `c·x ∈ ℤ`; the
/// minimum over `y` changes only where two jump locations `σ·x mod 1` collide,
/// i.e. where `(σ_t − σ_u)·x ∈ ℤ`.
pub fn breakpoint_denominators(terms: &[FloorTerm]) -> Vec<i64> {
    let mut qs: Vec<i64> = terms
        .iter()
        .map(|t| t.x_slope.abs())
        .filter(|&c| c != 0)
        .collect();
    let mut sigmas: Vec<i64> = terms
        .iter()
        .filter(|t| t.y_coeff != 0)
        .map(|t| -(t.y_coeff as i64) * t.x_slope)
        .collect();
    sigmas.sort_unstable();
    sigmas.dedup();
    for (i, a) in sigmas.iter().enumerate() {
        for b in &sigmas[i + 1..] {
            qs.push((a - b).abs());
        }
    }
    qs.sort_unstable();
    qs.dedup();
    qs
}

impl StepFunction {
    /// Builds `φ` on `[0, 1)`.
    ///
    /// Candidate breakpoints are all `k/q` for `q` in [`breakpoint_denominators`];
    /// `φ` is evaluated at the midpoint of each candidate interval and equal
    /// neighbours are merged.
    pub fn build(terms: &[FloorTerm]) -> Self {
        let qs = breakpoint_denominators(terms);
        let mut pts: Vec<Frac> = vec![Frac(0, 1)];
        for &q in &qs {
            for k in 1..q {
                let g = k.gcd(&q);
                pts.push(Frac(k / g, q / g));
            }
        }
        pts.sort_unstable_by(|a, b| a.cmp_value(b));
        pts.dedup();
        let ends: Vec<Frac> = pts.iter().skip(1).copied().chain([Frac(1, 1)]).collect();
        let vals: Vec<i64> = pts
            .par_iter()
            .zip(ends.par_iter())
            .map(|(a, b)| {
                // midpoint (a.0·b.1 + b.0·a.1) / (2·a.1·b.1)
                let num = a.0 as i128 * b.1 as i128 + b.0 as i128 * a.1 as i128;
                let den = 2 * a.1 as i128 * b.1 as i128;
                let g = num.gcd(&den);
                min_over_y(terms, &(num / g), &(den / g)) as i64
            })
            .collect();
        let mut breakpoints = Vec::new();
        let mut values: Vec<i64> = Vec::new();
        for (p, v) in pts.iter().zip(vals) {
            if values.last() == Some(&v) {
                continue;
            }
            breakpoints.push(BigRational::new(p.0.into(), p.1.into()));
            values.push(v);
        }
        StepFunction {
            breakpoints,
            values,
        }
    }

    /// Builds from explicit data; breakpoints must start at 0 and increase strictly in `[0, 1)`.
    pub fn from_parts(breakpoints: Vec<BigRational>, values: Vec<i64>) -> Result<Self> {
        let ok = !breakpoints.is_empty()
            && breakpoints.len() == values.len()
            && breakpoints[0].is_zero()
            && breakpoints.windows(2).all(|w| w[0] < w[1])
            && *breakpoints.last().unwrap() < BigRational::one();
        if !ok {
            return Err(Error::PreconditionViolation(
                "malformed step function".into(),
            ));
        }
        let mut sf = StepFunction {
            breakpoints: Vec::new(),
            values: Vec::new(),
        };
        for (b, v) in breakpoints.into_iter().zip(values) {
            if sf.values.last() != Some(&v) {
                sf.breakpoints.push(b);
                sf.values.push(v);
            }
        }
        Ok(sf)
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values == [0]
    }

    pub fn min_value(&self) -> i64 {
        *self.values.iter().min().expect("non-empty")
    }

    /// Intervals `[a, b)` with their values.
    pub fn intervals(&self) -> impl Iterator<Item = (&BigRational, BigRational, i64)> + '_ {
        let one = BigRational::one();
        self.breakpoints.iter().enumerate().map(move |(i, a)| {
            let b = self
                .breakpoints
                .get(i + 1)
                .cloned()
                .unwrap_or_else(|| one.clone());
            (a, b, self.values[i])
        })
    }

    /// Value at `x`, reduced modulo 1.
    pub fn value_at(&self, x: &BigRational) -> i64 {
        let x = x - x.floor();
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        self.values[idx - 1]
    }

    /// Two-column text table: one `breakpoint value` line per interval.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            s.push_str(&format!("{b} {v}\n"));
        }
        s
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let bad = || Error::PreconditionViolation(format!("bad table line: {line}"));
            let (b, v) = line.split_once(' ').ok_or_else(bad)?;
            bps.push(b.trim().parse::<BigRational>().map_err(|_| bad())?);
            vals.push(v.trim().parse::<i64>().map_err(|_| bad())?);
        }
        StepFunction::from_parts(bps, vals)
    }
}

/// `ϖ = ∫₀¹ φ dψ − ∫₀^{1/cutoff_den} φ(x) dx/x²`.
///
/// On a step function the first integral is `Σ v·(ψ(b) − ψ(a))`, regrouped per
/// breakpoint so each `ψ` value is computed once; the second is
/// `Σ v·(1/a − 1/b)` over the part of each interval below the cutoff.
pub fn varpi(sf: &StepFunction, cutoff_den: u64, prec: u32) -> Result<ApproxReal> {
    if sf.values[0] != 0 {
        return Err(Error::DivergentIntegral);
    }
    if sf.is_identically_zero() {
        return Ok(ApproxReal::zero(prec));
    }
    // ψ(1)·v_last + Σ_{i≥1} ψ(b_i)·(v_{i−1} − v_i)
    let mut jobs: Vec<(BigRational, i64)> = sf
        .breakpoints
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, b)| (b.clone(), sf.values[i - 1] - sf.values[i]))
        .collect();
    jobs.push((BigRational::one(), *sf.values.last().unwrap()));
    let weight: u64 = jobs.iter().map(|(_, w)| w.unsigned_abs()).sum();
    let work = prec + 4 + (64 - weight.max(1).leading_zeros());
    let parts: Vec<Result<ApproxReal>> = jobs
        .par_iter()
        .map(|(b, w)| Ok(digamma(b, work)?.mul_int(*w)))
        .collect();
    let mut acc = ApproxReal::zero(work);
    for p in parts {
        acc = &acc + &p?;
    }
    let cut = BigRational::new(BigInt::one(), BigInt::from(cutoff_den));
    let mut corr = BigRational::zero();
    for (a, b, v) in sf.intervals() {
        if v == 0 || *a >= cut {
            continue;
        }
        let hi = if b < cut { b } else { cut.clone() };
        corr += (a.recip() - hi.recip()) * BigInt::from(v);
    }
    Ok(acc.add_rational(&-corr))
}

/// `φ` and `ϖ` for a parameter set.
pub fn varpi_for(p: &ParamSet, prec: u32) -> Result<(StepFunction, ApproxReal)> {
    let sf = StepFunction::build(&phi_terms(p));
    let w = varpi(&sf, p.l(), prec)?;
    Ok((sf, w))
}

/// Sum of the terms at `(x, y)`, evaluated directly.
pub fn floor_sum(terms: &[FloorTerm], x: &BigRational, y: &BigRational) -> BigInt {
    terms.iter().map(|t| t.eval(x, y)).sum()
}

/// Reference minimum over `y`: the floor sum at every jump location, every
/// midpoint between consecutive locations, and every point of the grid
/// `{k/grid}`.
pub fn phi_brute_force(terms: &[FloorTerm], x: &BigRational, grid: u64) -> BigInt {
    let mut ys: Vec<BigRational> = vec![BigRational::zero()];
    for t in terms.iter().filter(|t| t.y_coeff != 0) {
        let v = x * BigInt::from(-(t.y_coeff as i64) * t.x_slope);
        ys.push(&v - v.floor());
    }
    ys.sort();
    ys.dedup();
    let mut cand = ys.clone();
    for (i, y) in ys.iter().enumerate() {
        let next = ys.get(i + 1).cloned().unwrap_or_else(BigRational::one);
        cand.push((y + next) / BigInt::from(2));
    }
    cand.extend((0..grid).map(|k| BigRational::new(k.into(), grid.into())));
    cand.iter()
        .map(|y| floor_sum(terms, x, y))
        .min()
        .expect("non-empty")
}

/// Positive fractional part, for callers that hold an arbitrary rational.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}
