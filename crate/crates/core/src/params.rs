//! Construction parameters `(M, δ₁..δ_J, s, r)` and the constant `C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ln2, ApproxReal, BigRational};

/// One construction instance.
///
/// The rational function built from these parameters has denominator bricks
/// `(t + δ_j n)_{(M−2δ_j)n+1}` raised to `e = s/J` and `2r` numerator bricks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    #[serde(rename = "M")]
    pub m: u64,
    pub deltas: Vec<u64>,
    pub s: u64,
    pub r: u64,
    #[serde(default)]
    pub include_numerator_bricks: bool,
}

/// `⌊s / (ln s)²⌋`, floored at 1.
pub fn default_r(s: u64) -> u64 {
    assert!(s >= 2, "default_r needs s >= 2");
    let l = (s as f64).ln();
    ((s as f64 / (l * l)).floor() as u64).max(1)
}

impl ParamSet {
    /// Parameters with `r = default_r(s)` and no numerator bricks in `φ`.
    pub fn new(m: u64, deltas: Vec<u64>, s: u64) -> Self {
        ParamSet {
            m,
            deltas,
            s,
            r: default_r(s.max(2)),
            include_numerator_bricks: false,
        }
    }

    pub fn with_r(mut self, r: u64) -> Self {
        self.r = r;
        self
    }

    pub fn with_numerator_bricks(mut self, on: bool) -> Self {
        self.include_numerator_bricks = on;
        self
    }

    /// Parameters for computations that depend only on `(M, δ)`, such as `φ`, `ϖ` and `C`.
    /// Uses `s = 4J` and `r = 1`, which satisfies the degree condition for every shape.
    pub fn shape(m: u64, deltas: Vec<u64>) -> Self {
        let s = 4 * deltas.len() as u64;
        ParamSet {
            m,
            deltas,
            s,
            r: 1,
            include_numerator_bricks: false,
        }
    }

    pub fn j(&self) -> u64 {
        self.deltas.len() as u64
    }

    /// Per-brick exponent `s/J`.
    pub fn e(&self) -> u64 {
        self.s / self.j()
    }

    pub fn delta1(&self) -> u64 {
        self.deltas[0]
    }

    /// `M − 2δ₁`, the index of the `D` factor and the top of the `Φ` prime range.
    pub fn l(&self) -> u64 {
        self.m - 2 * self.delta1()
    }

    /// `M_j = max(M − 2δ₁, M − δ_j)` for `j = 1..J`.
    pub fn m_js(&self) -> Vec<u64> {
        self.deltas
            .iter()
            .map(|&d| self.l().max(self.m - d))
            .collect()
    }

    /// `j* = ⌈iJ/s⌉` (1-based), the brick whose pole order first reaches `i`.
    pub fn j_star(&self, i: u64) -> u64 {
        (i * self.j()).div_ceil(self.s)
    }

    /// `Σ_j (M − 2δ_j)`.
    pub fn sum_lengths(&self) -> u64 {
        self.deltas.iter().map(|&d| self.m - 2 * d).sum()
    }

    /// `Σ_j max(M − 2δ₁, M − δ_j)`.
    pub fn sum_m_j(&self) -> u64 {
        self.m_js().iter().sum()
    }

    /// `deg R_n = 1 + 2rn − e·Σ_j((M − 2δ_j)n + 1)` as a function of `n`.
    pub fn degree(&self, n: u64) -> i128 {
        let e = self.e() as i128;
        1 + 2 * (self.r * n) as i128
            - e * self
                .deltas
                .iter()
                .map(|&d| ((self.m - 2 * d) * n + 1) as i128)
                .sum::<i128>()
    }

    /// Checks every constraint and returns the list of violations (empty if valid).
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.m == 0 {
            v.push("M >= 1".to_string());
        }
        if self.deltas.is_empty() {
            v.push("J >= 1".to_string());
            return v;
        }
        if self.deltas.windows(2).any(|w| w[0] > w[1]) {
            v.push("deltas non-decreasing".to_string());
        }
        if self.deltas.iter().any(|&d| 2 * d >= self.m) {
            v.push("δ_J < M/2".to_string());
        }
        let j = self.j();
        let even_total = self.s.is_multiple_of(2 * j) || (self.s == j && j.is_multiple_of(2));
        if self.s == 0 || !even_total {
            v.push("s multiple of 2J".to_string());
        }
        if self.r == 0 {
            v.push("r >= 1".to_string());
        }
        if v.is_empty() {
            // degree is affine in n: need slope ≤ 0 and the value at n = 1 ≤ −2
            let slope = 2 * self.r as i128 - (self.e() * self.sum_lengths()) as i128;
            if slope > 0 || self.degree(1) > -2 {
                v.push("deg R_n <= -2".to_string());
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// The parameter set with its δ-list repeated `k` times (and `s` scaled to match).
    pub fn replicate(&self, k: usize) -> Self {
        let mut deltas: Vec<u64> = self
            .deltas
            .iter()
            .flat_map(|&d| std::iter::repeat_n(d, k))
            .collect();
        deltas.sort_unstable();
        ParamSet {
            deltas,
            s: self.s * k as u64,
            ..self.clone()
        }
    }

    /// Reads the key/value config format (`M`, `deltas`, `s`, `r`, `include_numerator_bricks`).
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ParamSet is always serializable")
    }
}

/// `C = Σ(M−2δ_j) / (log 2·Σ(M−2δ_j) − ϖ + Σ max(M−2δ₁, M−δ_j))`.
pub fn constant_c(p: &ParamSet, varpi: &ApproxReal) -> Result<ApproxReal> {
    let prec = varpi.precision_bits();
    let num = p.sum_lengths() as i64;
    let den = &(&ln2(prec).mul_int(num) - varpi) + &ApproxReal::from_int(p.sum_m_j(), prec);
    if !den.is_positive() {
        return Err(Error::NonPositiveDenominator(format!("{den}")));
    }
    ApproxReal::from_int(num, prec).checked_div(&den)
}

/// `1/(1 + log 2)`, the value of `C` when `ϖ = 0` and all `δ_j = 0`.
pub fn baseline_c(prec: u32) -> ApproxReal {
    let one = ApproxReal::from_rational(&BigRational::from_integer(1.into()), prec);
    let den = &one + &ln2(prec);
    one.checked_div(&den).expect("1 + log 2 > 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_r_matches_formula() {
        // oracle: floor(s / ln(s)^2) evaluated independently
        assert_eq!(default_r(2), 4);
        assert_eq!(default_r(4), 2);
        assert_eq!(default_r(1_000_000), 5239);
    }

    #[test]
    fn validation_examples() {
        assert!(ParamSet::new(6, vec![0, 1], 4)
            .with_r(2)
            .violations()
            .is_empty());
        let v = ParamSet::new(6, vec![0, 3], 4).with_r(2).violations();
        assert!(v.iter().any(|s| s == "δ_J < M/2"), "{v:?}");
        let v = ParamSet::new(6, vec![0, 1], 6).with_r(2).violations();
        assert!(v.iter().any(|s| s == "s multiple of 2J"), "{v:?}");
        let v = ParamSet::new(6, vec![1, 0], 4).with_r(2).violations();
        assert!(v.iter().any(|s| s == "deltas non-decreasing"));
        // 2r = 22 > e·Σ = 20: the degree grows with n
        let v = ParamSet::new(6, vec![0, 1], 4).with_r(11).violations();
        assert_eq!(v, vec!["deg R_n <= -2".to_string()]);
    }

    #[test]
    fn derived_accessors() {
        let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
        assert_eq!((p.j(), p.e(), p.l()), (2, 2, 6));
        assert_eq!(p.m_js(), vec![6, 6]);
        assert_eq!((p.sum_lengths(), p.sum_m_j()), (10, 12));
        assert_eq!(
            (1..=4).map(|i| p.j_star(i)).collect::<Vec<_>>(),
            vec![1, 1, 2, 2]
        );
        // 1 + 4n − 2·(6n+1 + 4n+1) = −3 − 16n
        assert_eq!(p.degree(3), -51);
    }

    #[test]
    fn toml_round_trip() {
        let text = "M = 6\ndeltas = [0, 1]\ns = 4\nr = 2\n";
        let p = ParamSet::from_toml(text).unwrap();
        assert_eq!(p, ParamSet::new(6, vec![0, 1], 4).with_r(2));
        assert_eq!(ParamSet::from_toml(&p.to_toml()).unwrap(), p);
        assert!(ParamSet::from_toml("M = 6\ndeltas = [0]\ns = 2\nr = 1\nbogus = 1\n").is_err());
    }

    #[test]
    fn c_without_varpi_is_baseline() {
        for (m, j) in [(1u64, 1usize), (6, 2), (37, 5)] {
            let p = ParamSet::shape(m, vec![0; j]);
            let c = constant_c(&p, &ApproxReal::zero(128)).unwrap();
            let base = baseline_c(128);
            assert!((c.to_f64() - base.to_f64()).abs() < 1e-15);
            assert!(c.overlaps(&base));
        }
    }

    #[test]
    fn c_rejects_nonpositive_denominator() {
        let p = ParamSet::shape(6, vec![0, 1]);
        let big = ApproxReal::from_int(100, 64);
        assert!(matches!(
            constant_c(&p, &big),
            Err(Error::NonPositiveDenominator(_))
        ));
    }
}
