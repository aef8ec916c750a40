//! Growth constants: `α` (decay of `S_n`), `β` (growth of the coefficients),
//! the adjusted `α̂, β̂`, and the saddle point `x₀` for per-brick exponent 1.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{ln2, ln_approx, ln_rational, ApproxReal};
use crate::params::ParamSet;
use crate::step_phi::varpi_for;

/// Extra bits carried through the log sums; coefficients reach a few thousand
/// and there are `2J + 4` terms.
const ALPHA_GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, Serialize)]
pub struct GrowthConstants {
    pub alpha: ApproxReal,
    pub beta: ApproxReal,
    pub varpi: ApproxReal,
    pub alpha_hat: ApproxReal,
    pub beta_hat: ApproxReal,
    /// Saddle point, present when the closed form for `α` applies (`s = J`).
    pub x0: Option<ApproxReal>,
    /// False when `α` comes from the floating-point maximizer.
    pub alpha_certified: bool,
}

/// `(2r+M+X)(r+X)Π(r+δ_j+X) − X(r+M+X)Π(r+M−δ_j+X)` scaled by `2^{k(J+2)}` at `X = a/2^k`.
fn saddle_scaled(p: &ParamSet, a: &BigInt, k: u32) -> BigInt {
    let one = BigInt::one() << k;
    let lin = |c: u64| BigInt::from(c) * &one + a;
    let mut left = lin(2 * p.r + p.m) * lin(p.r);
    let mut right = a * lin(p.r + p.m);
    for &d in &p.deltas {
        left *= lin(p.r + d);
        right *= lin(p.r + p.m - d);
    }
    left - right
}

/// The saddle-point polynomial evaluated exactly at a rational point.
pub fn saddle_polynomial(p: &ParamSet, x: &BigRational) -> BigRational {
    let lin = |c: u64| x + BigInt::from(c);
    let mut left = lin(2 * p.r + p.m) * lin(p.r);
    let mut right = x * lin(p.r + p.m);
    for &d in &p.deltas {
        left *= lin(p.r + d);
        right *= lin(p.r + p.m - d);
    }
    left - right
}

/// `x₀` by bisection on `[0, 2r+M]` with exact sign tests, to width below `2^-(prec+2)`.
pub fn saddle_root(p: &ParamSet, prec: u32) -> Result<ApproxReal> {
    if p.deltas.is_empty() {
        return Err(Error::InvalidParams(vec!["J >= 1".into()]));
    }
    let hi0 = 2 * p.r + p.m;
    let sign = |a: &BigInt, k: u32| saddle_scaled(p, a, k).sign();
    let (s_lo, s_hi) = (sign(&BigInt::zero(), 0), sign(&BigInt::from(hi0), 0));
    if s_lo == s_hi || s_lo == num_bigint::Sign::NoSign || s_hi == num_bigint::Sign::NoSign {
        return Err(Error::NoSignChange(format!("[0, {hi0}]")));
    }
    // bracket [lo, lo + 1]·2^-k; the sign at lo stays s_lo throughout
    let (mut lo, mut k) = (BigInt::zero(), 0u32);
    let mut width = BigInt::from(hi0);
    while width > BigInt::one() {
        let half = &width >> 1;
        let mid = &lo + &half;
        if sign(&mid, 0) == s_lo {
            lo = mid;
            width -= half;
        } else {
            width = half;
        }
    }
    let target = prec + 2;
    while k < target {
        lo <<= 1;
        k += 1;
        let mid = &lo + BigInt::one();
        if sign(&mid, k) == s_lo {
            lo = mid;
        }
    }
    let den = BigInt::one() << k;
    let lo_q = BigRational::new(lo.clone(), den.clone());
    let hi_q = BigRational::new(lo + BigInt::one(), den);
    Ok(ApproxReal::from_bounds(&lo_q, &hi_q, prec + 4))
}

/// Closed form of `α` when the per-brick exponent is 1:
/// `Σ(M−2δ_j)log(M−2δ_j) + (2r+M)log(2r+M+x₀) + r log(r+x₀) − (r+M)log(r+M+x₀)
///  + Σ[(r+δ_j)log(r+δ_j+x₀) − (r+M−δ_j)log(r+M−δ_j+x₀)]`.
pub fn alpha_closed_form(p: &ParamSet, prec: u32) -> Result<(ApproxReal, ApproxReal)> {
    if p.deltas.is_empty() || p.s != p.j() {
        return Err(Error::PreconditionViolation(
            "closed form needs s = J".into(),
        ));
    }
    let w = prec + ALPHA_GUARD_BITS;
    let x0 = saddle_root(p, w)?;
    let shifted = |c: u64| ln_approx(&x0.add_rational(&BigRational::from_integer(c.into())));
    let mut acc = ApproxReal::zero(w);
    for &d in &p.deltas {
        let l = p.m - 2 * d;
        acc = &acc + &ln_rational(&BigRational::from_integer(l.into()), w)?.mul_int(l as i64);
        acc = &acc + &shifted(p.r + d)?.mul_int((p.r + d) as i64);
        acc = &acc - &shifted(p.r + p.m - d)?.mul_int((p.r + p.m - d) as i64);
    }
    acc = &acc + &shifted(2 * p.r + p.m)?.mul_int((2 * p.r + p.m) as i64);
    if p.r > 0 {
        acc = &acc + &shifted(p.r)?.mul_int(p.r as i64);
    }
    acc = &acc - &shifted(p.r + p.m)?.mul_int((p.r + p.m) as i64);
    Ok((x0, acc))
}

/// `β = (2r+M) log(r + M/2) − M log(M/2) + log 2 · (s/J) Σ(M − 2δ_j)`.
pub fn beta_formula(p: &ParamSet, prec: u32) -> ApproxReal {
    let w = prec + ALPHA_GUARD_BITS;
    let half = |x: u64| BigRational::new(x.into(), 2.into());
    let log = |q: BigRational| ln_rational(&q, w).expect("positive argument");
    let lead = 2 * p.r + p.m;
    let mut acc = ln2(w).mul_int((p.e() * p.sum_lengths()) as i64);
    acc = &acc + &log(half(lead)).mul_int(lead as i64);
    &acc - &log(half(p.m)).mul_int(p.m as i64)
}

/// `α̂ = α − (s/J)ϖ + (s/J)Σ_j max(M−2δ₁, M−δ_j)`, and the same shift for `β̂`.
pub fn adjust(
    alpha: &ApproxReal,
    beta: &ApproxReal,
    p: &ParamSet,
    varpi: &ApproxReal,
) -> (ApproxReal, ApproxReal) {
    let e = p.e() as i64;
    let shift =
        &ApproxReal::from_int(e * p.sum_m_j() as i64, varpi.precision_bits()) - &varpi.mul_int(e);
    (alpha + &shift, beta + &shift)
}

/// All growth constants of `p`. `α` is certified when `s = J`; otherwise it
/// comes from [`alpha_via_maximization`] with its heuristic error estimate.
pub fn growth_constants(p: &ParamSet, prec: u32) -> Result<GrowthConstants> {
    p.validate()?;
    let (_, varpi) = varpi_for(p, prec)?;
    let (x0, alpha, alpha_certified) = if p.e() == 1 {
        let (x0, a) = alpha_closed_form(p, prec)?;
        (Some(x0), a, true)
    } else {
        (None, alpha_via_maximization(p)?.to_approx(prec), false)
    };
    let beta = beta_formula(p, prec);
    let (alpha_hat, beta_hat) = adjust(&alpha, &beta, p, &varpi);
    Ok(GrowthConstants {
        alpha,
        beta,
        varpi,
        alpha_hat,
        beta_hat,
        x0,
        alpha_certified,
    })
}

/// Non-certified result of maximizing `F`.
#[derive(Debug, Clone, Serialize)]
pub struct MaximizationResult {
    pub alpha: f64,
    /// Heuristic: predicted remaining ascent plus rounding in the log sums.
    pub error_estimate: f64,
    /// `log max F`.
    pub log_max: f64,
    /// Maximizer `(x₀, x_1, …, x_J)`, one coordinate per δ-group.
    pub point: Vec<f64>,
    pub iterations: usize,
}

impl MaximizationResult {
    pub fn to_approx(&self, prec: u32) -> ApproxReal {
        let q = |x: f64| BigRational::from_float(x).expect("finite");
        ApproxReal::from_bounds(
            &q(self.alpha - self.error_estimate),
            &q(self.alpha + self.error_estimate),
            prec,
        )
    }
}

/// `ln(1 − e^u)` for `u < 0`.
fn l0(u: f64) -> f64 {
    (-u.exp_m1()).ln()
}

/// First derivative of [`l0`].
fn l1(u: f64) -> f64 {
    -1.0 / (-u).exp_m1()
}

/// Second derivative of [`l0`].
fn l2(u: f64) -> f64 {
    let d = (-u).exp_m1();
    -(-u).exp() / (d * d)
}

/// `log F` on the symmetric slice, in `u = log x` coordinates `(u₀, u_1..u_J)`:
/// `r u₀ + M L(u₀) + Σ e[(r+δ_j)u_j + (M−2δ_j)L(u_j)] − (2r+M) L(u₀ + eΣu_j)`.
struct Reduced {
    a: Vec<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
    c: f64,
}

impl Reduced {
    fn new(p: &ParamSet) -> Self {
        let e = p.e() as f64;
        let mut a = vec![p.r as f64];
        let mut b = vec![p.m as f64];
        let mut w = vec![1.0];
        for &d in &p.deltas {
            a.push((p.r + d) as f64);
            b.push((p.m - 2 * d) as f64);
            w.push(e);
        }
        Reduced {
            a,
            b,
            w,
            c: (2 * p.r + p.m) as f64,
        }
    }

    fn total(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.w).map(|(x, w)| x * w).sum()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let mut f = -self.c * l0(self.total(u));
        for (i, &ui) in u.iter().enumerate() {
            f += self.w[i] * (self.a[i] * ui + self.b[i] * l0(ui));
        }
        f
    }

    fn gradient_hessian(&self, u: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = u.len();
        let s = self.total(u);
        let (ls1, ls2) = (l1(s), l2(s));
        let g = DVector::from_fn(n, |i, _| {
            self.w[i] * (self.a[i] + self.b[i] * l1(u[i])) - self.c * self.w[i] * ls1
        });
        let h = DMatrix::from_fn(n, n, |i, k| {
            let diag = if i == k {
                self.w[i] * self.b[i] * l2(u[i])
            } else {
                0.0
            };
            diag - self.c * self.w[i] * self.w[k] * ls2
        });
        (g, h)
    }
}

/// `log F(x₀, x₁, …, x_s)` on the full cube; `−∞` on the boundary, including `(1, …, 1)`.
pub fn log_f_full(p: &ParamSet, x: &[f64]) -> f64 {
    assert_eq!(x.len() as u64, p.s + 1);
    if x.iter().any(|&v| v <= 0.0 || v >= 1.0) {
        return f64::NEG_INFINITY;
    }
    let e = p.e() as usize;
    let mut f = p.r as f64 * x[0].ln() + p.m as f64 * (1.0 - x[0]).ln();
    for (j, &d) in p.deltas.iter().enumerate() {
        for &v in &x[1 + j * e..1 + (j + 1) * e] {
            f += (p.r + d) as f64 * v.ln() + (p.m - 2 * d) as f64 * (1.0 - v).ln();
        }
    }
    let s: f64 = x.iter().map(|v| v.ln()).sum();
    f - (2 * p.r + p.m) as f64 * l0(s)
}

/// `(2r+M) log(2r+M) − M log M`.
fn alpha_offset(p: &ParamSet) -> f64 {
    let lead = (2 * p.r + p.m) as f64;
    lead * lead.ln() - p.m as f64 * (p.m as f64).ln()
}

const MAX_ITERATIONS: usize = 2000;

/// Levenberg–Marquardt ascent from one start. Returns `(f, u, iterations, predicted gain)`.
fn ascend(model: &Reduced, mut u: Vec<f64>) -> Option<(f64, Vec<f64>, usize, f64)> {
    let n = u.len();
    let mut f = model.value(&u);
    let mut lambda = 1e-3;
    for it in 0..MAX_ITERATIONS {
        let (g, h) = model.gradient_hessian(&u);
        let neg_h = -&h;
        // Newton decrement at λ = 0 decides convergence when −H is positive definite
        if let Some(ch) = neg_h.clone().cholesky() {
            let d = ch.solve(&g);
            let gain = 0.5 * g.dot(&d);
            let rel = (0..n).map(|i| (d[i] / u[i]).abs()).fold(0.0, f64::max);
            if gain <= 1e-13 * f.abs().max(1.0) && rel < 1e-9 {
                return Some((f, u, it, gain.max(0.0)));
            }
        }
        let scale = DMatrix::from_diagonal(&neg_h.diagonal().map(|v| v.abs().max(1e-300)));
        let mut accepted = false;
        while lambda < 1e20 {
            let Some(ch) = (&neg_h + &scale * lambda).cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let d = ch.solve(&g);
            let cand: Vec<f64> = (0..n).map(|i| u[i] + d[i]).collect();
            if cand.iter().all(|&v| v < 0.0) && model.total(&cand) < 0.0 {
                let fc = model.value(&cand);
                if fc.is_finite() && fc >= f {
                    u = cand;
                    f = fc;
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no ascent direction left at machine precision
            return Some((f, u, it, 0.0));
        }
    }
    None
}

/// `α = (2r+M)log(2r+M) − M log M + log max F`, maximizing `F` on the slice
/// where coordinates in the same δ-group are equal. Not certified.
pub fn alpha_via_maximization(p: &ParamSet) -> Result<MaximizationResult> {
    p.validate()?;
    let model = Reduced::new(p);
    let e = p.e() as f64;
    let x0_starts = [0.1, 0.5, 0.9];
    let xj_starts = [
        0.5,
        1.0 - 1.0 / (e + 1.0),
        1.0 - 1.0 / ((e + 1.0) * (e + 1.0)),
    ];
    let starts: Vec<Vec<f64>> = x0_starts
        .iter()
        .flat_map(|&a| {
            xj_starts.iter().map(move |&b| {
                let mut u = vec![b.ln(); p.deltas.len() + 1];
                u[0] = f64::ln(a);
                u
            })
        })
        .collect();
    let runs: Vec<_> = starts.into_par_iter().map(|u| ascend(&model, u)).collect();
    let best = runs
        .into_iter()
        .flatten()
        .max_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| {
                // deterministic tie-break: lexicographically smaller point wins
                b.1.iter()
                    .zip(&a.1)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .ok_or(Error::NonConvergence(MAX_ITERATIONS))?;
    let (log_max, u, iterations, gain) = best;
    let alpha = alpha_offset(p) + log_max;
    let rounding = 1e-14 * (alpha_offset(p).abs() + log_max.abs() + alpha.abs());
    Ok(MaximizationResult {
        alpha,
        error_estimate: gain + rounding,
        log_max,
        point: u.iter().map(|v| v.exp()).collect(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use num_traits::Signed;

    #[test]
    fn saddle_root_brackets_sign_change() {
        let p = presets::claim2();
        let x0 = saddle_root(&p, 64).unwrap();
        assert!(saddle_polynomial(&p, &x0.lower()).is_positive());
        assert!(saddle_polynomial(&p, &x0.upper()).is_negative());
        assert!((x0.to_f64() - 0.194387).abs() < 1e-6);
        assert!(x0.error_f64() < 2f64.powi(-64));
    }

    #[test]
    fn no_sign_change_is_reported() {
        // (3+X)(1+X)² − X(2+X)² = 3 + 3X + X² has no positive root
        let p = ParamSet {
            m: 1,
            deltas: vec![0],
            s: 1,
            r: 1,
            include_numerator_bricks: false,
        };
        let x = BigRational::new(7.into(), 3.into());
        let expect = BigRational::from_integer(3.into()) + &x * BigInt::from(3) + &x * &x;
        assert_eq!(saddle_polynomial(&p, &x), expect);
        assert!(matches!(
            alpha_closed_form(&p, 64),
            Err(Error::NoSignChange(_))
        ));
    }

    #[test]
    fn closed_form_needs_unit_exponent() {
        assert!(matches!(
            alpha_closed_form(&ParamSet::new(6, vec![0, 1], 4).with_r(2), 64),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn claim2_constants() {
        let p = presets::claim2();
        let (x0, alpha) = alpha_closed_form(&p, 128).unwrap();
        assert!((x0.to_f64() - 0.194387).abs() < 1e-6);
        assert!(
            (alpha.to_f64() + 38489.009014).abs() < 1e-5,
            "{}",
            alpha.to_decimal(8)
        );
        assert!(alpha.error_f64() < 1e-30);
        let beta = beta_formula(&p, 128);
        assert!(
            (beta.to_f64() - 58209.043057).abs() < 1e-5,
            "{}",
            beta.to_decimal(8)
        );
    }

    #[test]
    fn beta_degenerate_r_zero() {
        let p = ParamSet {
            m: 6,
            deltas: vec![0, 1],
            s: 4,
            r: 0,
            include_numerator_bricks: false,
        };
        let expect = ln2(64).mul_int(2 * 10);
        assert!(beta_formula(&p, 64).overlaps(&expect));
    }

    #[test]
    fn adjustment_without_varpi() {
        let p = ParamSet::new(6, vec![0, 0], 4).with_r(2);
        let a = ApproxReal::from_int(-100, 64);
        let b = ApproxReal::from_int(50, 64);
        let (ah, bh) = adjust(&a, &b, &p, &ApproxReal::zero(64));
        // s·M = 24
        assert_eq!(ah.to_f64(), -76.0);
        assert_eq!(bh.to_f64(), 74.0);
    }

    #[test]
    fn maximization_matches_closed_form() {
        let p = presets::claim2();
        let (_, exact) = alpha_closed_form(&p, 64).unwrap();
        let num = alpha_via_maximization(&p).unwrap();
        let rel = ((num.alpha - exact.to_f64()) / exact.to_f64()).abs();
        assert!(rel < 1e-6, "{} vs {}", num.alpha, exact.to_f64());
        assert!(num.point.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn reduced_and_full_agree_and_symmetry_is_not_beaten() {
        let p = ParamSet::new(6, vec![0, 1], 8).with_r(2);
        let res = alpha_via_maximization(&p).unwrap();
        let e = p.e() as usize;
        let mut full = vec![res.point[0]];
        for j in 0..p.deltas.len() {
            full.extend(std::iter::repeat_n(res.point[1 + j], e));
        }
        assert!((log_f_full(&p, &full) - res.log_max).abs() < 1e-9);
        assert_eq!(log_f_full(&p, &vec![1.0; full.len()]), f64::NEG_INFINITY);
        // single-coordinate perturbations leave the symmetric slice and never help
        for i in 0..full.len() {
            for eps in [1e-3, -1e-3, 1e-2, -1e-2] {
                let mut x = full.clone();
                x[i] = (x[i] + eps).clamp(1e-9, 1.0 - 1e-9);
                assert!(log_f_full(&p, &x) <= res.log_max + 1e-12);
            }
        }
    }
}
