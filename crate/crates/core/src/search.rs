//! Structured families and searches for sets with small `|A(A+1)|` or
//! small `|AA| + |(A+1)(A+1)|`.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Element, FieldCtx};
use crate::setops::FSet;

/// Largest number of candidate sets [`exhaustive`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `{g, g², ..., g^n}`
    Geometric { ratio: Element, len: usize },
    /// `{a, a+d, ..., a+(n-1)d}`
    Arithmetic { start: Element, step: Element, len: usize },
    /// `{1, g, ..., g^{n-1}}`; a full subgroup when `ord(g) = n`.
    Subgroup { generator: Element, len: usize },
    /// `h·H` for the subgroup `H ≤ F_p^*` of order `n`.
    SubgroupCoset { shift: Element, order: usize },
}

pub fn generate_family(ctx: FieldCtx, family: &Family) -> Result<FSet> {
    let build = |elems: Vec<Element>, len: usize, what: &str| -> Result<FSet> {
        let set = FSet::new(ctx, elems)?;
        if set.len() != len {
            return Err(Error::BadParams(format!(
                "{what} has only {} distinct elements, wanted {len}",
                set.len()
            )));
        }
        Ok(set)
    };
    match family {
        Family::Geometric { ratio, len } => {
            let mut cur = ratio.clone();
            let mut out = Vec::with_capacity(*len);
            for _ in 0..*len {
                out.push(cur.clone());
                cur = ctx.mul(&cur, ratio);
            }
            build(out, *len, "geometric progression")
        }
        Family::Arithmetic { start, step, len } => {
            let mut cur = start.clone();
            let mut out = Vec::with_capacity(*len);
            for _ in 0..*len {
                out.push(cur.clone());
                cur = ctx.add(&cur, step);
            }
            build(out, *len, "arithmetic progression")
        }
        Family::Subgroup { generator, len } => {
            let order = ctx.multiplicative_order(generator).ok_or_else(|| {
                Error::BadParams(format!("{generator} has infinite multiplicative order"))
            })?;
            if (order as usize) < *len {
                return Err(Error::BadParams(format!(
                    "{generator} generates a subgroup of order {order} < {len}"
                )));
            }
            let mut cur = ctx.one();
            let mut out = Vec::with_capacity(*len);
            for _ in 0..*len {
                out.push(cur.clone());
                cur = ctx.mul(&cur, generator);
            }
            build(out, *len, "subgroup")
        }
        Family::SubgroupCoset { shift, order } => {
            let p = ctx
                .modulus()
                .ok_or_else(|| Error::BadParams("subgroup cosets need a prime field".into()))?;
            if *order == 0 || (p - 1) % *order as u64 != 0 {
                return Err(Error::BadParams(format!("{order} does not divide p - 1 = {}", p - 1)));
            }
            if shift.is_zero() {
                return Err(Error::BadParams("coset representative must be nonzero".into()));
            }
            let root = ctx.primitive_root().expect("prime field");
            let g = ctx.pow(&root, (p - 1) / *order as u64);
            let mut cur = shift.clone();
            let mut out = Vec::with_capacity(*order);
            for _ in 0..*order {
                out.push(cur.clone());
                cur = ctx.mul(&cur, &g);
            }
            build(out, *order, "subgroup coset")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `|A(A+1)|`
    ShiftProduct,
    /// `|AA| + |(A+1)(A+1)|`
    TwoProducts,
}

impl Objective {
    pub fn evaluate(self, a: &FSet) -> u64 {
        let one = a.ctx().one();
        match self {
            Objective::ShiftProduct => {
                a.shifted_product(a, &one).expect("same context").len() as u64
            }
            Objective::TwoProducts => {
                let shifted = a.shift(&one);
                let aa = a.product(a).expect("same context").len();
                let bb = shifted.product(&shifted).expect("same context").len();
                (aa + bb) as u64
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::ShiftProduct => "shift_product",
            Objective::TwoProducts => "two_products",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "shift_product" | "a(a+1)" => Ok(Objective::ShiftProduct),
            "two_products" | "aa+(a+1)(a+1)" => Ok(Objective::TwoProducts),
            other => Err(Error::Parse(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchRecord {
    pub set: FSet,
    pub objective: Objective,
    pub p: Option<u64>,
    pub n: usize,
    /// Raw objective size.
    pub size: u64,
    /// `ln(size)/ln|A|` to 4 decimals; the raw size when `|A| = 1`.
    pub value: f64,
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub generator: String,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

impl SearchRecord {
    pub fn new(set: FSet, objective: Objective, generator: impl Into<String>, seed: Option<u64>) -> Self {
        let size = objective.evaluate(&set);
        let n = set.len();
        let value = if n >= 2 {
            round4((size as f64).ln() / (n as f64).ln())
        } else {
            size as f64
        };
        SearchRecord {
            p: set.ctx().modulus(),
            set,
            objective,
            n,
            size,
            value,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            seed,
            generator: generator.into(),
        }
    }

    /// Total order: objective, then size, then lexicographically smallest set.
    pub fn rank_cmp(&self, other: &SearchRecord) -> Ordering {
        self.objective
            .cmp(&other.objective)
            .then(self.size.cmp(&other.size))
            .then_with(|| self.set.elems().cmp(other.set.elems()))
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Global minimum of the objective over all `n`-subsets of `F_p \ {0}`.
pub fn exhaustive(ctx: FieldCtx, n: usize, objective: Objective) -> Result<SearchRecord> {
    let p = ctx
        .modulus()
        .ok_or_else(|| Error::BadParams("exhaustive search needs a prime field".into()))?;
    if n == 0 || n as u64 > p - 1 {
        return Err(Error::BadParams(format!("cannot pick {n} nonzero elements of F_{p}")));
    }
    let candidates = binomial(p - 1, n as u64);
    if candidates > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge(format!(
            "C({}, {n}) = {candidates} candidates exceeds {EXHAUSTIVE_LIMIT}",
            p - 1
        )));
    }
    let best = (1..p as i64)
        .combinations(n)
        .par_bridge()
        .map(|c| {
            let set = FSet::from_ints(ctx, c);
            (objective.evaluate(&set), set)
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.elems().cmp(b.1.elems())))
        .expect("at least one candidate");
    Ok(SearchRecord::new(best.1, objective, format!("exhaustive(p={p},n={n})"), None))
}

/// Local search by single-element swaps. Deterministic for a given seed and
/// never returns a record worse than `start`.
pub fn hill_climb(start: &FSet, objective: Objective, steps: usize, seed: u64) -> Result<SearchRecord> {
    if start.len() < 2 {
        return Err(Error::SetTooSmall(format!("hill climbing needs |A| ≥ 2, got {}", start.len())));
    }
    let ctx = start.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = start.clone();
    let mut current_size = objective.evaluate(&current);
    let mut best = (current_size, current.clone());
    let propose = |rng: &mut ChaCha8Rng, cur: &FSet| -> Option<FSet> {
        let out = rng.gen_range(0..cur.len());
        let candidate = match ctx.modulus() {
            Some(p) => ctx.int(rng.gen_range(1..p) as i64),
            None => {
                let num = rng.gen_range(-50i64..=50);
                let den = rng.gen_range(1i64..=12);
                ctx.frac(num, den).ok()?
            }
        };
        if candidate.is_zero() || cur.contains(&candidate) {
            return None;
        }
        let mut elems: Vec<Element> = cur.elems().to_vec();
        elems[out] = candidate;
        FSet::new(ctx, elems).ok()
    };
    for _ in 0..steps {
        let Some(next) = propose(&mut rng, &current) else { continue };
        let size = objective.evaluate(&next);
        if size <= current_size {
            current = next;
            current_size = size;
            if size < best.0 || (size == best.0 && current.elems() < best.1.elems()) {
                best = (size, current.clone());
            }
        }
    }
    Ok(SearchRecord::new(
        best.1,
        objective,
        format!("hill_climb(steps={steps})"),
        Some(seed),
    ))
}

/// Uniformly random `n`-subset of `F_p \ {0}`.
pub fn random_subset(ctx: FieldCtx, n: usize, rng: &mut impl Rng) -> Result<FSet> {
    let p = ctx
        .modulus()
        .ok_or_else(|| Error::BadParams("random subsets need a prime field".into()))?;
    if n as u64 > p - 1 {
        return Err(Error::BadParams(format!("cannot pick {n} nonzero elements of F_{p}")));
    }
    if p < 100_000 {
        let mut all: Vec<i64> = (1..p as i64).collect();
        all.shuffle(rng);
        return Ok(FSet::from_ints(ctx, all.into_iter().take(n)));
    }
    let mut elems = std::collections::BTreeSet::new();
    while elems.len() < n {
        elems.insert(rng.gen_range(1..p));
    }
    Ok(FSet::from_ints(ctx, elems.into_iter().map(|v| v as i64)))
}

/// Appends records to a CSV ledger with columns `objective,p,n,set,value,seed`.
pub fn append_ledger(path: &Path, records: &[SearchRecord]) -> Result<()> {
    let exists = path.exists() && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::BadParams(format!("cannot open ledger {}: {e}", path.display())))?;
    write_ledger(file, records, !exists)
}

pub fn write_ledger<W: Write>(w: W, records: &[SearchRecord], header: bool) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let io = |e: csv::Error| Error::BadParams(format!("ledger write failed: {e}"));
    if header {
        out.write_record(["objective", "p", "n", "set", "value", "seed"]).map_err(io)?;
    }
    for r in records {
        out.write_record([
            r.objective.to_string(),
            r.p.map_or("rational".to_string(), |p| p.to_string()),
            r.n.to_string(),
            r.set.iter().map(|e| e.to_string()).join(" "),
            format!("{:.4}", r.value),
            r.seed.map_or(String::new(), |s| s.to_string()),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(|e| Error::BadParams(format!("ledger flush failed: {e}")))?;
    Ok(())
}
