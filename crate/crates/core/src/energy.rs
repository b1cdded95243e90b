//! Representation functions, moment energies and dyadic level sets.
//!
//! A [`RepHistogram`] records, for every `x`, the number of pairs `(a, d)`
//! with `a ∘ d = x`. Its `n`-th moment `Σ_x r(x)^n` is the `n`-th moment
//! energy; for `n = 2` and the ratio operation this is the usual
//! multiplicative energy.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{Element, FieldCtx};
use crate::numeric::{self, CompensatedSum, ENERGY_REL_TOL};
use crate::setops::{FSet, SetOp};

const PAR_PAIRS: usize = 1 << 15;

/// Upper bound on `(|X||Y|)^n` accepted by [`energy_bruteforce`].
pub const BRUTEFORCE_LIMIT: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RepHistogram {
    ctx: FieldCtx,
    op: SetOp,
    label: String,
    mass: u64,
    counts: Vec<(Element, u64)>,
}

/// A positive rational moment `num/den ≥ 1`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Moment {
    num: u32,
    den: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Energy {
    Exact(BigUint),
    Approx(f64),
}

/// A dyadic level set `{x : τ ≤ r(x) < 2τ}` with its weight `|S|·τ^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicBucket {
    pub tau: u64,
    pub members: FSet,
    pub weight_exponent: Moment,
    /// `|members| · tau^n`
    pub weight: Energy,
    /// `Σ_{x ∈ members} r(x)^n`
    pub contribution: Energy,
}

impl Moment {
    pub const ONE: Moment = Moment { num: 1, den: 1 };
    pub const FOUR_THIRDS: Moment = Moment { num: 4, den: 3 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num < den {
            return Err(Error::BadParams(format!("moment {num}/{den} must be ≥ 1")));
        }
        let g = num.gcd(&den);
        Ok(Moment { num: num / g, den: den / g })
    }

    pub fn int(n: u32) -> Self {
        Moment::new(n, 1).expect("integer moment ≥ 1")
    }

    pub fn integer(self) -> Option<u32> {
        (self.den == 1).then_some(self.num)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `r^n` in floating point.
    fn real_power(self, r: u64) -> f64 {
        let x = r as f64;
        match (self.num, self.den) {
            (n, 1) => x.powi(n as i32),
            (4, 3) => x * x.cbrt(),
            _ => x.powf(self.as_f64()),
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Moment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid moment {s:?}"));
        match s.trim().split_once('/') {
            None => Moment::new(s.trim().parse().map_err(|_| bad())?, 1),
            Some((n, d)) => Moment::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
        }
    }
}

impl Serialize for Moment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Energy {
    pub fn to_f64(&self) -> f64 {
        match self {
            Energy::Exact(v) => numeric::biguint_to_f64(v),
            Energy::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Energy::Exact(v) => Some(v),
            Energy::Approx(_) => None,
        }
    }

    /// Exact comparison for exact values, relative tolerance `1e-9` otherwise.
    pub fn cmp_tol(&self, other: &Energy) -> Ordering {
        match (self, other) {
            (Energy::Exact(a), Energy::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if numeric::ge_rel(a, b, ENERGY_REL_TOL) && numeric::le_rel(a, b, ENERGY_REL_TOL) {
                    Ordering::Equal
                } else {
                    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                }
            }
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Exact(v) => write!(f, "{v}"),
            Energy::Approx(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Energy::Exact(v) => match u64::try_from(v) {
                Ok(small) => serializer.serialize_u64(small),
                Err(_) => serializer.collect_str(v),
            },
            Energy::Approx(v) => serializer.serialize_f64(*v),
        }
    }
}

fn merge_counts(mut a: HashMap<Element, u64>, b: HashMap<Element, u64>) -> HashMap<Element, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn sorted_counts(map: HashMap<Element, u64>) -> Vec<(Element, u64)> {
    let mut counts: Vec<(Element, u64)> = map.into_iter().collect();
    counts.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
    counts
}

/// Representation function `r_{X∘Y}(x) = |{(a, b) ∈ X × Y : a ∘ b = x}|`.
pub fn rep_function(x: &FSet, y: &FSet, op: SetOp) -> Result<RepHistogram> {
    x.same_ctx(y)?;
    if op == SetOp::Ratio && y.contains_zero() {
        return Err(Error::DivisionByZero);
    }
    let ctx = x.ctx();
    let fold_row = |mut acc: HashMap<Element, u64>, a: &Element| {
        for b in y {
            let v = op.apply(&ctx, a, b).expect("divisor checked nonzero");
            *acc.entry(v).or_insert(0) += 1;
        }
        acc
    };
    let map = if x.len() * y.len() >= PAR_PAIRS {
        x.elems()
            .par_iter()
            .fold(HashMap::new, fold_row)
            .reduce(HashMap::new, merge_counts)
    } else {
        x.iter().fold(HashMap::new(), fold_row)
    };
    let label = format!("X{}Y", op.symbol());
    Ok(RepHistogram {
        ctx,
        op,
        label,
        mass: (x.len() * y.len()) as u64,
        counts: sorted_counts(map),
    })
}

impl RepHistogram {
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn op(&self) -> SetOp {
        self.op
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Number of tuples represented; equals `Σ_x r(x)`.
    pub fn mass(&self) -> u64 {
        self.mass
    }

    pub fn counts(&self) -> &[(Element, u64)] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, x: &Element) -> u64 {
        self.counts
            .binary_search_by(|(k, _)| k.cmp(x))
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn support(&self) -> FSet {
        FSet::from_sorted(self.ctx, self.counts.iter().map(|(k, _)| k.clone()).collect())
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().map(|(_, c)| *c).max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| *c).sum()
    }

    /// Histogram restricted to keys in `keep`.
    pub fn restrict(&self, keep: &FSet) -> RepHistogram {
        let counts: Vec<(Element, u64)> =
            self.counts.iter().filter(|(k, _)| keep.contains(k)).cloned().collect();
        RepHistogram {
            ctx: self.ctx,
            op: self.op,
            label: format!("{}|restricted", self.label),
            mass: counts.iter().map(|(_, c)| *c).sum(),
            counts,
        }
    }

    /// Weighted combination of two histograms, treating each as a multiset:
    /// the result counts `r(z) = Σ_{x ∘ y = z} r_self(x) r_other(y)`.
    ///
    /// This realizes composite sources such as `r_{BA/A}`, which counts
    /// triples `(b, a, a')` with `ba/a' = z`.
    pub fn combine(&self, other: &RepHistogram, op: SetOp) -> Result<RepHistogram> {
        if self.ctx != other.ctx {
            return Err(Error::CtxMismatch);
        }
        if op == SetOp::Ratio && other.get(&self.ctx.zero()) > 0 {
            return Err(Error::DivisionByZero);
        }
        let ctx = self.ctx;
        let fold_row = |mut acc: HashMap<Element, u64>, (a, wa): &(Element, u64)| {
            for (b, wb) in &other.counts {
                let v = op.apply(&ctx, a, b).expect("divisor checked nonzero");
                *acc.entry(v).or_insert(0) += wa * wb;
            }
            acc
        };
        let map = if self.len() * other.len() >= PAR_PAIRS {
            self.counts
                .par_iter()
                .fold(HashMap::new, fold_row)
                .reduce(HashMap::new, merge_counts)
        } else {
            self.counts.iter().fold(HashMap::new(), fold_row)
        };
        Ok(RepHistogram {
            ctx,
            op,
            label: format!("({}){}({})", self.label, op.symbol(), other.label),
            mass: self.mass * other.mass,
            counts: sorted_counts(map),
        })
    }

    /// Exact integer moment `Σ_x r(x)^n`.
    pub fn energy_int(&self, n: u32) -> BigUint {
        let mut acc = BigUint::zero();
        let mut chunk: u128 = 0;
        for &(_, c) in &self.counts {
            match (c as u128).checked_pow(n).and_then(|t| chunk.checked_add(t)) {
                Some(s) => chunk = s,
                None => {
                    acc += BigUint::from(chunk);
                    chunk = 0;
                    acc += BigUint::from(c).pow(n);
                }
            }
        }
        acc + BigUint::from(chunk)
    }

    /// Moment for an arbitrary rational exponent, by compensated summation.
    pub fn energy_real(&self, moment: Moment) -> f64 {
        self.counts
            .iter()
            .map(|&(_, c)| moment.real_power(c))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `Σ_x r(x)^n`: exact for integer `n`, floating point otherwise.
    pub fn energy_moment(&self, moment: Moment) -> Energy {
        match moment.integer() {
            Some(n) => Energy::Exact(self.energy_int(n)),
            None => Energy::Approx(self.energy_real(moment)),
        }
    }

    /// `⌊log₂ r_max⌋ + 1`, the number of nonempty-able dyadic levels.
    pub fn dyadic_levels(&self) -> u32 {
        match self.max_count() {
            0 => 0,
            m => 64 - m.leading_zeros(),
        }
    }
}

impl Serialize for RepHistogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("RepHistogram", 4)?;
        st.serialize_field("op", &self.op)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("mass", &self.mass)?;
        st.serialize_field("counts", &self.counts)?;
        st.end()
    }
}

/// `Σ_x r(x)^n` for the histogram of `X ∘ Y`.
pub fn energy_moment(h: &RepHistogram, moment: Moment) -> Energy {
    h.energy_moment(moment)
}

fn pair_relation(
    ctx: FieldCtx,
    op: SetOp,
) -> impl Fn(&(Element, Element), &(Element, Element)) -> bool {
    move |(x1, y1), (x2, y2)| match op {
        SetOp::Ratio => ctx.mul(x1, y2) == ctx.mul(x2, y1),
        SetOp::Product => ctx.mul(x1, y1) == ctx.mul(x2, y2),
        SetOp::Sum => ctx.add(x1, y1) == ctx.add(x2, y2),
        SetOp::Difference => ctx.add(x1, y2) == ctx.add(x2, y1),
    }
}

/// Counts `2n`-tuples `(x_1..x_n, y_1..y_n)` with `x_1∘y_1 = ... = x_n∘y_n`
/// by walking the tuples one coordinate pair at a time.
///
/// Equalities are tested division-free (cross-multiplication for ratios), so
/// this shares no code path with [`rep_function`].
pub fn energy_bruteforce(x: &FSet, y: &FSet, op: SetOp, n: u32) -> Result<BigUint> {
    x.same_ctx(y)?;
    if n == 0 {
        return Err(Error::BadParams("moment must be positive".into()));
    }
    if op == SetOp::Ratio && y.contains_zero() {
        return Err(Error::DivisionByZero);
    }
    let pairs_count = (x.len() * y.len()) as u128;
    if pairs_count.checked_pow(n).is_none_or(|t| t > BRUTEFORCE_LIMIT) {
        return Err(Error::TooLarge(format!(
            "({}·{})^{n} tuples exceeds {BRUTEFORCE_LIMIT}",
            x.len(),
            y.len()
        )));
    }
    let pairs: Vec<(Element, Element)> = x
        .iter()
        .flat_map(|a| y.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    let same = pair_relation(x.ctx(), op);

    fn walk<F: Fn(&(Element, Element), &(Element, Element)) -> bool>(
        first: &(Element, Element),
        pairs: &[(Element, Element)],
        same: &F,
        remaining: u32,
    ) -> u64 {
        if remaining == 0 {
            return 1;
        }
        pairs
            .iter()
            .filter(|q| same(first, q))
            .map(|_| walk(first, pairs, same, remaining - 1))
            .sum()
    }

    let total: u64 = pairs.iter().map(|first| walk(first, &pairs, &same, n - 1)).sum();
    Ok(BigUint::from(total))
}

/// Dyadic decomposition of the support: buckets `τ = 2^i` with
/// `τ ≤ r(x) < 2τ`, ordered by increasing `τ`. Weights use exponent 1.
pub fn dyadic_buckets(h: &RepHistogram) -> Vec<DyadicBucket> {
    dyadic_buckets_with(h, Moment::ONE)
}

/// As [`dyadic_buckets`], weighting each bucket by `|S|·τ^n` for the given moment.
pub fn dyadic_buckets_with(h: &RepHistogram, moment: Moment) -> Vec<DyadicBucket> {
    let mut levels: Vec<Vec<(Element, u64)>> = vec![Vec::new(); h.dyadic_levels() as usize];
    for (k, c) in h.counts() {
        let level = 63 - c.leading_zeros() as usize;
        levels[level].push((k.clone(), *c));
    }
    levels
        .into_iter()
        .enumerate()
        .filter(|(_, members)| !members.is_empty())
        .map(|(level, members)| {
            let tau = 1u64 << level;
            let size = members.len() as u64;
            let (weight, contribution) = match moment.integer() {
                Some(n) => (
                    Energy::Exact(BigUint::from(size) * BigUint::from(tau).pow(n)),
                    Energy::Exact(members.iter().map(|(_, c)| BigUint::from(*c).pow(n)).sum()),
                ),
                None => (
                    Energy::Approx(size as f64 * moment.real_power(tau)),
                    Energy::Approx(
                        members
                            .iter()
                            .map(|(_, c)| moment.real_power(*c))
                            .collect::<CompensatedSum>()
                            .value(),
                    ),
                ),
            };
            DyadicBucket {
                tau,
                members: FSet::from_sorted(h.ctx(), members.into_iter().map(|(k, _)| k).collect()),
                weight_exponent: moment,
                weight,
                contribution,
            }
        })
        .collect()
}

/// The bucket maximizing `|S_τ|·τ^n`; ties go to the smaller `τ`.
pub fn richest_bucket(h: &RepHistogram, moment: Moment) -> Result<DyadicBucket> {
    let mut best: Option<DyadicBucket> = None;
    for b in dyadic_buckets_with(h, moment) {
        let better = match &best {
            None => true,
            Some(cur) => b.weight.cmp_tol(&cur.weight) == Ordering::Greater,
        };
        if better {
            best = Some(b);
        }
    }
    best.ok_or(Error::EmptyHistogram)
}

impl DyadicBucket {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Lower bound `E_n / (2^n (⌊log₂ r_max⌋ + 1))` that the richest bucket's
    /// weight always meets.
    pub fn pigeonhole_floor(h: &RepHistogram, moment: Moment) -> f64 {
        let levels = h.dyadic_levels().max(1) as f64;
        h.energy_moment(moment).to_f64() / (2f64.powf(moment.as_f64()) * levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldCtx {
        FieldCtx::rational()
    }

    fn geo() -> FSet {
        FSet::from_ints(q(), [1, 2, 4])
    }

    fn counts_of(h: &RepHistogram) -> Vec<(String, u64)> {
        h.counts().iter().map(|(k, c)| (k.to_string(), *c)).collect()
    }

    #[test]
    fn ratio_histogram_of_geometric_triple() {
        let h = rep_function(&geo(), &geo(), SetOp::Ratio).unwrap();
        let mut got = counts_of(&h);
        got.sort();
        let mut want = vec![
            ("1".to_string(), 3),
            ("2".to_string(), 2),
            ("1/2".to_string(), 2),
            ("4".to_string(), 1),
            ("1/4".to_string(), 1),
        ];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(h.total(), 9);
    }

    #[test]
    fn product_histogram_of_geometric_triple() {
        let h = rep_function(&geo(), &geo(), SetOp::Product).unwrap();
        let got = counts_of(&h);
        assert_eq!(
            got,
            vec![
                ("1".to_string(), 1),
                ("2".to_string(), 2),
                ("4".to_string(), 3),
                ("8".to_string(), 2),
                ("16".to_string(), 1)
            ]
        );
    }

    #[test]
    fn singleton_histogram() {
        let one = FSet::from_ints(q(), [1]);
        let h = rep_function(&one, &one, SetOp::Ratio).unwrap();
        assert_eq!(counts_of(&h), vec![("1".to_string(), 1)]);
    }

    #[test]
    fn ratio_histogram_rejects_zero() {
        let z = FSet::from_ints(q(), [0, 1]);
        assert_eq!(rep_function(&geo(), &z, SetOp::Ratio), Err(Error::DivisionByZero));
        assert_eq!(energy_bruteforce(&geo(), &z, SetOp::Ratio, 2), Err(Error::DivisionByZero));
    }

    #[test]
    fn integer_moments() {
        let h = rep_function(&geo(), &geo(), SetOp::Ratio).unwrap();
        assert_eq!(h.energy_int(1), BigUint::from(9u32));
        assert_eq!(h.energy_int(2), BigUint::from(19u32));
        assert_eq!(h.energy_int(4), BigUint::from(115u32));
    }

    #[test]
    fn four_thirds_moment() {
        let h = rep_function(&geo(), &geo(), SetOp::Ratio).unwrap();
        let e = h.energy_real(Moment::FOUR_THIRDS);
        let want = 3f64.powf(4.0 / 3.0) + 2.0 * 2f64.powf(4.0 / 3.0) + 2.0;
        assert!((e - want).abs() <= 1e-12 * want);
        assert!(matches!(h.energy_moment(Moment::FOUR_THIRDS), Energy::Approx(_)));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(energy_bruteforce(&geo(), &geo(), SetOp::Ratio, 2).unwrap(), 19u32.into());
        let one = FSet::from_ints(q(), [1]);
        assert_eq!(energy_bruteforce(&one, &one, SetOp::Ratio, 4).unwrap(), 1u32.into());
        let a = FSet::from_ints(q(), [1, 2]);
        assert_eq!(energy_bruteforce(&a, &a, SetOp::Ratio, 2).unwrap(), 6u32.into());
    }

    #[test]
    fn bruteforce_guard() {
        let big = FSet::from_ints(q(), 1..=20);
        assert!(matches!(
            energy_bruteforce(&big, &big, SetOp::Ratio, 4),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn buckets_of_geometric_triple() {
        let h = rep_function(&geo(), &geo(), SetOp::Ratio).unwrap();
        let b = dyadic_buckets(&h);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].tau, 1);
        assert_eq!(b[0].members.to_string(), "{1/4,4}");
        assert_eq!(b[1].tau, 2);
        assert_eq!(b[1].members.to_string(), "{1/2,1,2}");
    }

    #[test]
    fn bucket_of_exact_power_of_two() {
        let ctx = q();
        let h = RepHistogram {
            ctx,
            op: SetOp::Ratio,
            label: "test".into(),
            mass: 8,
            counts: vec![(ctx.int(5), 8)],
        };
        let b = dyadic_buckets(&h);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].tau, 8);
    }

    #[test]
    fn richest_bucket_examples() {
        let h = rep_function(&geo(), &geo(), SetOp::Ratio).unwrap();
        let b4 = richest_bucket(&h, Moment::int(4)).unwrap();
        assert_eq!(b4.tau, 2);
        assert_eq!(b4.weight, Energy::Exact(48u32.into()));
        assert!(b4.weight.to_f64() >= DyadicBucket::pigeonhole_floor(&h, Moment::int(4)));
        let b2 = richest_bucket(&h, Moment::int(2)).unwrap();
        assert_eq!(b2.tau, 2);
        assert_eq!(b2.weight, Energy::Exact(12u32.into()));

        let one = FSet::from_ints(q(), [1]);
        let h1 = rep_function(&one, &one, SetOp::Ratio).unwrap();
        let b = richest_bucket(&h1, Moment::FOUR_THIRDS).unwrap();
        assert_eq!((b.tau, b.len()), (1, 1));
    }

    #[test]
    fn richest_bucket_of_empty_histogram() {
        let e = FSet::empty(q());
        let h = rep_function(&e, &geo(), SetOp::Ratio).unwrap();
        assert_eq!(richest_bucket(&h, Moment::int(2)), Err(Error::EmptyHistogram));
    }

    #[test]
    fn richest_bucket_ties_prefer_small_tau() {
        // one element with r = 8 and sixteen with r = 1: weights 8^{4/3} = 16 = 16·1
        let ctx = FieldCtx::prime(101).unwrap();
        let mut counts: Vec<(Element, u64)> = (1..=16).map(|i| (ctx.int(i), 1)).collect();
        counts.push((ctx.int(50), 8));
        let h = RepHistogram { ctx, op: SetOp::Ratio, label: "t".into(), mass: 24, counts };
        let b = richest_bucket(&h, Moment::FOUR_THIRDS).unwrap();
        assert_eq!(b.tau, 1);
    }

    #[test]
    fn composite_histogram_counts_triples() {
        let a = geo();
        let ab = rep_function(&a, &a, SetOp::Product).unwrap();
        let aa = rep_function(&a, &FSet::from_ints(q(), [1]), SetOp::Product).unwrap();
        let bar = ab.combine(&aa, SetOp::Ratio).unwrap();
        assert_eq!(bar.total(), 27);
        assert_eq!(bar.mass(), 27);
    }

    #[test]
    fn moment_parsing() {
        assert_eq!("4/3".parse::<Moment>().unwrap(), Moment::FOUR_THIRDS);
        assert_eq!("8/6".parse::<Moment>().unwrap(), Moment::FOUR_THIRDS);
        assert_eq!("2".parse::<Moment>().unwrap().integer(), Some(2));
        assert!("1/2".parse::<Moment>().is_err());
    }
}
