//! Evaluation of `C` over candidate shapes `(M, δ)` and reproducible searches
//! for large values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ln2, ApproxReal};
use crate::params::{constant_c, ParamSet};
use crate::step_phi::varpi_for;

/// Screening precision for the first pass of every search.
pub const SCREEN_BITS: u32 = 64;

/// `(M, δ)` with the δ multiset divided by its largest replication factor.
/// Replicating δ leaves `C` unchanged, so candidates are compared by this key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub m: u64,
    pub deltas: Vec<u64>,
}

impl CanonicalKey {
    pub fn of(m: u64, deltas: &[u64]) -> Self {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for &d in deltas {
            *counts.entry(d).or_default() += 1;
        }
        let g = counts.values().fold(0usize, |g, &c| g.gcd(&c)).max(1);
        let deltas = counts
            .iter()
            .flat_map(|(&d, &c)| std::iter::repeat_n(d, c / g))
            .collect();
        CanonicalKey { m, deltas }
    }

    pub fn params(&self) -> ParamSet {
        ParamSet::shape(self.m, self.deltas.clone())
    }

    /// Ranking tie-break order `(M, J, δ)`.
    fn order(&self) -> (u64, usize, &[u64]) {
        (self.m, self.deltas.len(), &self.deltas)
    }
}

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d: Vec<String> = self.deltas.iter().map(u64::to_string).collect();
        write!(f, "M={};deltas={}", self.m, d.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub key: CanonicalKey,
    pub params: ParamSet,
    #[serde(rename = "C")]
    pub c: ApproxReal,
    pub varpi: ApproxReal,
    pub eval_seconds: f64,
}

impl Candidate {
    /// `C·(1 + log 2)`, the ratio to the constant without the common factor.
    pub fn normalized(&self) -> ApproxReal {
        let prec = self.c.precision_bits();
        &self.c + &(&self.c * &ln2(prec))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Random {
        seed: u64,
        iterations: usize,
    },
    /// Hill climbing from a seeded random start; `moves` bounds the accepted steps.
    Local {
        seed: u64,
        moves: usize,
    },
    /// A fixed list of shapes as `(M, δ)`.
    List {
        sets: Vec<(u64, Vec<u64>)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(rename = "M_max")]
    pub m_max: u64,
    pub delta_max: u64,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    pub strategy: Strategy,
    /// Precision of the final re-evaluation of the finalists.
    #[serde(default = "default_final_bits")]
    pub precision_bits: u32,
    /// Number of screened candidates re-evaluated at `precision_bits`.
    #[serde(default = "default_finalists")]
    pub finalists: usize,
}

fn default_final_bits() -> u32 {
    256
}

fn default_finalists() -> usize {
    10
}

impl SearchConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.m_max == 0 {
            v.push("M_max >= 1".into());
        }
        if self.j_max == 0 {
            v.push("J_max >= 1".into());
        }
        if self.precision_bits < SCREEN_BITS {
            v.push(format!("precision_bits >= {SCREEN_BITS}"));
        }
        v
    }
}

/// One persisted evaluation: `ϖ` at a precision, stored exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheRecord {
    key: CanonicalKey,
    prec: u32,
    /// Scale of the stored midpoint and radius, which may exceed `prec`.
    varpi_bits: u32,
    varpi_mid: String,
    varpi_rad: String,
    seconds: f64,
}

/// Memoizing evaluator. Values are deterministic, so concurrent inserts of the
/// same key are benign.
#[derive(Default)]
pub struct Evaluator {
    cache: Mutex<HashMap<(CanonicalKey, u32), (ApproxReal, f64)>>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads records written by [`Evaluator::save`]; unknown lines are skipped.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let ev = Self::new();
        if !path.exists() {
            return Ok(ev);
        }
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut map = ev.cache.lock().expect("cache lock");
        for line in file.lines() {
            let Ok(rec) = serde_json::from_str::<CacheRecord>(&line?) else {
                continue;
            };
            let (Ok(mid), Ok(rad)) = (
                rec.varpi_mid.parse::<BigInt>(),
                rec.varpi_rad.parse::<BigInt>(),
            ) else {
                continue;
            };
            map.insert(
                (rec.key, rec.prec),
                (
                    ApproxReal::from_scaled(mid, rad, rec.varpi_bits),
                    rec.seconds,
                ),
            );
        }
        drop(map);
        Ok(ev)
    }

    /// Writes every cached entry, one JSON record per line, in key order.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let map = self.cache.lock().expect("cache lock");
        let mut entries: Vec<_> = map.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for ((key, prec), (v, secs)) in entries {
            let rec = CacheRecord {
                key: key.clone(),
                prec: *prec,
                varpi_bits: v.precision_bits(),
                varpi_mid: v.mid_scaled().to_string(),
                varpi_rad: v.rad_scaled().to_string(),
                seconds: *secs,
            };
            writeln!(
                out,
                "{}",
                serde_json::to_string(&rec).expect("serializable")
            )?;
        }
        out.flush()
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `ϖ` and `C` for the shape of `p`; `s` and `r` do not enter.
    pub fn evaluate(&self, p: &ParamSet, prec: u32) -> Result<Candidate> {
        let key = CanonicalKey::of(p.m, &p.deltas);
        let params = key.params();
        params.validate()?;
        let hit = self
            .cache
            .lock()
            .expect("cache lock")
            .get(&(key.clone(), prec))
            .cloned();
        let (varpi, secs) = match hit {
            Some(v) => v,
            None => {
                let t = Instant::now();
                let (_, w) = varpi_for(&params, prec)?;
                let v = (w, t.elapsed().as_secs_f64());
                self.cache
                    .lock()
                    .expect("cache lock")
                    .insert((key.clone(), prec), v.clone());
                v
            }
        };
        let c = constant_c(&params, &varpi)?;
        Ok(Candidate {
            key,
            params,
            c,
            varpi,
            eval_seconds: secs,
        })
    }
}

/// [`Evaluator::evaluate`] with a throwaway cache.
pub fn evaluate_candidate(p: &ParamSet, prec: u32) -> Result<Candidate> {
    Evaluator::new().evaluate(p, prec)
}

/// Descending by the lower endpoint of `C`; ties by `(M, J, δ)` ascending.
pub fn rank(cands: &mut [Candidate]) {
    cands.sort_by(|a, b| {
        b.c.lower()
            .cmp(&a.c.lower())
            .then_with(|| a.key.order().cmp(&b.key.order()))
    });
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Finalists at the final precision, ranked, followed by the remaining
    /// screened candidates at screening precision.
    pub ranked: Vec<Candidate>,
    pub evaluated: usize,
    /// Shapes whose evaluation failed, with the error.
    pub rejected: Vec<(CanonicalKey, String)>,
}

impl SearchReport {
    pub fn best(&self) -> Option<&Candidate> {
        self.ranked.first()
    }

    /// `M,J,deltas,varpi,C_lower,C_upper,seconds`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::result::Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["M", "J", "deltas", "varpi", "C_lower", "C_upper", "seconds"])?;
        for c in &self.ranked {
            let d: Vec<String> = c.key.deltas.iter().map(u64::to_string).collect();
            out.write_record([
                c.key.m.to_string(),
                c.key.deltas.len().to_string(),
                d.join(" "),
                c.varpi.to_decimal(12),
                crate::kernel::rational_to_decimal(&c.c.lower(), 12),
                crate::kernel::rational_to_decimal(&c.c.upper(), 12),
                format!("{:.3}", c.eval_seconds),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shapes with `δ_j ≤ min(delta_max, ⌊(M−1)/2⌋)`.
fn valid_shape(m: u64, deltas: &[u64], cfg: &SearchConfig) -> bool {
    m >= 1
        && m <= cfg.m_max
        && !deltas.is_empty()
        && deltas.len() <= cfg.j_max
        && deltas.iter().all(|&d| d <= cfg.delta_max && 2 * d < m)
}

fn exhaustive_keys(cfg: &SearchConfig) -> BTreeSet<CanonicalKey> {
    let mut keys = BTreeSet::new();
    for m in 1..=cfg.m_max {
        let top = cfg.delta_max.min((m - 1) / 2);
        let mut stack: Vec<Vec<u64>> = (0..=top).map(|d| vec![d]).collect();
        while let Some(ds) = stack.pop() {
            keys.insert(CanonicalKey::of(m, &ds));
            if ds.len() < cfg.j_max {
                let last = *ds.last().expect("non-empty");
                for d in last..=top {
                    let mut next = ds.clone();
                    next.push(d);
                    stack.push(next);
                }
            }
        }
    }
    keys
}

fn random_shape(rng: &mut ChaCha8Rng, cfg: &SearchConfig) -> CanonicalKey {
    let m = rng.gen_range(1..=cfg.m_max);
    let j = rng.gen_range(1..=cfg.j_max);
    let top = cfg.delta_max.min((m - 1) / 2);
    let mut ds: Vec<u64> = (0..j).map(|_| rng.gen_range(0..=top)).collect();
    ds.sort_unstable();
    CanonicalKey::of(m, &ds)
}

/// Neighbours: one δ up or down, a δ added or removed, `M` up or down.
fn neighbours(key: &CanonicalKey, cfg: &SearchConfig) -> BTreeSet<CanonicalKey> {
    let mut out = BTreeSet::new();
    let mut push = |m: u64, mut ds: Vec<u64>| {
        ds.sort_unstable();
        if valid_shape(m, &ds, cfg) {
            out.insert(CanonicalKey::of(m, &ds));
        }
    };
    let (m, ds) = (key.m, &key.deltas);
    for i in 0..ds.len() {
        let mut up = ds.clone();
        up[i] += 1;
        push(m, up);
        if ds[i] > 0 {
            let mut down = ds.clone();
            down[i] -= 1;
            push(m, down);
        }
        let mut removed = ds.clone();
        removed.remove(i);
        push(m, removed);
    }
    for d in 0..=cfg.delta_max.min(m.saturating_sub(1) / 2) {
        let mut added = ds.clone();
        added.push(d);
        push(m, added);
    }
    push(m + 1, ds.clone());
    if m > 1 {
        push(m - 1, ds.clone());
    }
    out
}

/// Evaluates `keys` in parallel; the output order follows `keys`.
fn screen(
    ev: &Evaluator,
    keys: &[CanonicalKey],
    prec: u32,
) -> (Vec<Candidate>, Vec<(CanonicalKey, String)>) {
    let results: Vec<_> = keys
        .par_iter()
        .map(|k| (k, ev.evaluate(&k.params(), prec)))
        .collect();
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (k, r) in results {
        match r {
            Ok(c) => ok.push(c),
            Err(e) => bad.push((k.clone(), e.to_string())),
        }
    }
    (ok, bad)
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    let mut v = [a.clone(), b.clone()];
    rank(&mut v);
    v[0].key == a.key
}

/// Runs the configured strategy, screening at [`SCREEN_BITS`] and re-evaluating
/// the top `finalists` at `precision_bits`. Deterministic for a given config.
pub fn search_with(cfg: &SearchConfig, ev: &Evaluator) -> Result<SearchReport> {
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(Error::InvalidParams(v));
    }
    let mut keys: BTreeSet<CanonicalKey> = BTreeSet::new();
    let mut rejected = Vec::new();
    let mut screened: Vec<Candidate> = Vec::new();
    match &cfg.strategy {
        Strategy::Exhaustive => keys = exhaustive_keys(cfg),
        Strategy::Random { seed, iterations } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            keys = (0..*iterations)
                .map(|_| random_shape(&mut rng, cfg))
                .collect();
        }
        Strategy::List { sets } => {
            keys = sets.iter().map(|(m, d)| CanonicalKey::of(*m, d)).collect();
        }
        Strategy::Local { seed, moves } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut current = loop {
                let k = random_shape(&mut rng, cfg);
                match ev.evaluate(&k.params(), SCREEN_BITS) {
                    Ok(c) => break c,
                    Err(e) => rejected.push((k, e.to_string())),
                }
            };
            let mut seen: BTreeSet<CanonicalKey> = BTreeSet::from([current.key.clone()]);
            screened.push(current.clone());
            for _ in 0..*moves {
                let fresh: Vec<CanonicalKey> = neighbours(&current.key, cfg)
                    .into_iter()
                    .filter(|k| !seen.contains(k))
                    .collect();
                let (cands, bad) = screen(ev, &fresh, SCREEN_BITS);
                seen.extend(fresh);
                rejected.extend(bad);
                screened.extend(cands.iter().cloned());
                let mut cands = cands;
                rank(&mut cands);
                match cands.into_iter().next() {
                    Some(c) if better(&c, &current) => current = c,
                    _ => break,
                }
            }
        }
    }
    if !keys.is_empty() {
        let ks: Vec<CanonicalKey> = keys.into_iter().collect();
        let (cands, bad) = screen(ev, &ks, SCREEN_BITS);
        screened = cands;
        rejected.extend(bad);
    }
    rank(&mut screened);
    let evaluated = screened.len();
    let n_final = cfg.finalists.min(screened.len());
    let final_keys: Vec<CanonicalKey> = screened[..n_final].iter().map(|c| c.key.clone()).collect();
    let (mut finals, bad) = screen(ev, &final_keys, cfg.precision_bits);
    rejected.extend(bad);
    rank(&mut finals);
    let mut ranked = finals;
    ranked.extend(screened.into_iter().skip(n_final));
    rejected.sort();
    rejected.dedup();
    Ok(SearchReport {
        config: cfg.clone(),
        ranked,
        evaluated,
        rejected,
    })
}

pub fn search(cfg: &SearchConfig) -> Result<SearchReport> {
    search_with(cfg, &Evaluator::new())
}
