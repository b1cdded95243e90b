//! Theorem-instance verifiers and the full proof-chain trace for the
//! shifted product bound.
//!
//! Constant-free inequalities are hard assertions: a violation returns
//! [`Error::HardAssertion`]. Inequalities with hidden constants or
//! logarithmic losses are reported as `lhs / rhs` ratios with the constant
//! taken as 1 and the power of `ln|A|` listed separately.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::energy::{dyadic_buckets, richest_bucket, rep_function, DyadicBucket, Moment, RepHistogram};
use crate::error::{Error, Result};
use crate::field::{Element, FieldCtx, GuardExponent};
use crate::numeric::{big_ln, biguint_to_f64, ENERGY_REL_TOL};
use crate::popularity::{decompose_with, energy_43, refine_43};
use crate::setops::{FSet, SetOp};

/// Largest quadruple space `|A|²|B|²` enumerated by [`equiv_classes`].
pub const QUADRUPLE_LIMIT: u128 = 100_000_000;
/// Largest number of lookups spent on a single dyadic chain in the trace.
pub const CHAIN_LIMIT: u128 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Int(BigUint),
    Real(f64),
}

impl Quantity {
    pub fn int(v: impl Into<BigUint>) -> Self {
        Quantity::Int(v.into())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Int(v) => biguint_to_f64(v),
            Quantity::Real(v) => *v,
        }
    }

    pub fn ln(&self) -> f64 {
        match self {
            Quantity::Int(v) => big_ln(v),
            Quantity::Real(v) => v.ln(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Quantity::Int(v) => v.is_zero(),
            Quantity::Real(v) => *v == 0.0,
        }
    }

    /// `lhs / rhs` computed through logarithms so huge integers stay finite.
    pub fn ratio(&self, rhs: &Quantity) -> f64 {
        match (self.is_zero(), rhs.is_zero()) {
            (true, true) => 1.0,
            (false, true) => f64::INFINITY,
            (true, false) => 0.0,
            (false, false) => (self.ln() - rhs.ln()).exp(),
        }
    }

    /// Exact comparison for integers, relative tolerance otherwise.
    pub fn cmp_tol(&self, other: &Quantity, tol: f64) -> Ordering {
        match (self, other) {
            (Quantity::Int(a), Quantity::Int(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= tol * a.abs().max(b.abs()) {
                    Ordering::Equal
                } else {
                    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                }
            }
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Int(v) => write!(f, "{v}"),
            Quantity::Real(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Int(v) => match u64::try_from(v) {
                Ok(small) => s.serialize_u64(small),
                Err(_) => s.collect_str(v),
            },
            Quantity::Real(v) => s.serialize_f64(*v),
        }
    }
}

/// Serializes as a JSON number when it fits in `u64`, as a string otherwise.
fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    Quantity::Int(v.clone()).serialize(s)
}

fn big(v: impl Into<BigUint>) -> BigUint {
    v.into()
}

fn pow(n: usize, k: u32) -> BigUint {
    BigUint::from(n).pow(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Constant-free; hard-asserted.
    Exact,
    /// Holds up to constants and powers of `ln|A|`; ratio only.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<~")]
    Lesssim,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Lesssim => "<~",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub name: String,
    pub kind: StepKind,
    pub relation: Relation,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub ratio: f64,
    /// `None` for asymptotic steps.
    pub holds: Option<bool>,
    /// Relative tolerance used when a side is not an integer.
    pub tolerance: f64,
    /// Power `d` of the `(ln|A|)^d` loss hidden in an asymptotic step.
    pub log_power: Option<u32>,
    pub note: String,
}

impl TraceStep {
    fn exact(name: &str, relation: Relation, lhs: Quantity, rhs: Quantity, note: &str) -> Self {
        Self::exact_tol(name, relation, lhs, rhs, 0.0, note)
    }

    fn exact_tol(name: &str, relation: Relation, lhs: Quantity, rhs: Quantity, tol: f64, note: &str) -> Self {
        let ord = lhs.cmp_tol(&rhs, tol);
        let holds = match relation {
            Relation::Eq => ord == Ordering::Equal,
            Relation::Le | Relation::Lesssim => ord != Ordering::Greater,
            Relation::Ge => ord != Ordering::Less,
        };
        TraceStep {
            name: name.into(),
            kind: StepKind::Exact,
            relation,
            ratio: lhs.ratio(&rhs),
            lhs,
            rhs,
            holds: Some(holds),
            tolerance: tol,
            log_power: None,
            note: note.into(),
        }
    }

    fn asymptotic(name: &str, lhs: Quantity, rhs: Quantity, log_power: u32, note: &str) -> Self {
        TraceStep {
            name: name.into(),
            kind: StepKind::Asymptotic,
            relation: Relation::Lesssim,
            ratio: lhs.ratio(&rhs),
            lhs,
            rhs,
            holds: None,
            tolerance: 0.0,
            log_power: Some(log_power),
            note: note.into(),
        }
    }

    pub fn relation_symbol(&self) -> &'static str {
        self.relation.symbol()
    }

    pub fn failed(&self) -> bool {
        self.holds == Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: String,
    pub inputs: BTreeMap<String, String>,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub ratio: f64,
    pub flags: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<VerificationReport>,
}

/// Column names of [`VerificationReport::csv_rows`].
pub const CSV_HEADER: [&str; 10] =
    ["instance", "theorem_id", "step", "kind", "relation", "lhs", "rhs", "ratio", "holds", "log_power"];

impl VerificationReport {
    fn new(theorem_id: &str, inputs: BTreeMap<String, String>, lhs: Quantity, rhs: Quantity) -> Self {
        VerificationReport {
            theorem_id: theorem_id.into(),
            inputs,
            ratio: lhs.ratio(&rhs),
            lhs,
            rhs,
            flags: BTreeMap::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            trace: None,
            sub_reports: Vec::new(),
        }
    }

    pub fn all_flags_hold(&self) -> bool {
        self.flags.values().all(|f| *f)
    }

    /// Number of CSV rows: the headline inequality, each trace step, and the
    /// rows of every sub-report.
    pub fn step_count(&self) -> usize {
        1 + self.trace.as_ref().map_or(0, Vec::len)
            + self.sub_reports.iter().map(|r| r.step_count()).sum::<usize>()
    }

    /// One row per inequality step, columns as in [`CSV_HEADER`].
    pub fn csv_rows(&self, instance: usize) -> Vec<Vec<String>> {
        let mut rows = vec![vec![
            instance.to_string(),
            self.theorem_id.clone(),
            "main".into(),
            "asymptotic".into(),
            Relation::Lesssim.symbol().into(),
            self.lhs.to_string(),
            self.rhs.to_string(),
            format!("{:.6}", self.ratio),
            String::new(),
            String::new(),
        ]];
        for step in self.trace.iter().flatten() {
            rows.push(vec![
                instance.to_string(),
                self.theorem_id.clone(),
                step.name.clone(),
                match step.kind {
                    StepKind::Exact => "exact".into(),
                    StepKind::Asymptotic => "asymptotic".into(),
                },
                step.relation.symbol().into(),
                step.lhs.to_string(),
                step.rhs.to_string(),
                format!("{:.6}", step.ratio),
                step.holds.map_or(String::new(), |h| h.to_string()),
                step.log_power.map_or(String::new(), |d| d.to_string()),
            ]);
        }
        for sub in &self.sub_reports {
            rows.extend(sub.csv_rows(instance));
        }
        rows
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Strip 0 from every input set before computing, reporting both sizes.
    pub strict: bool,
}

fn field_inputs(ctx: FieldCtx, named: &[(&str, &FSet)]) -> BTreeMap<String, String> {
    let mut inputs = BTreeMap::from([("field".to_string(), ctx.to_string())]);
    for (name, set) in named {
        inputs.insert(name.to_string(), set.to_string());
    }
    inputs
}

/// Applies the zero policy: strict mode strips zeros, otherwise zeros are
/// kept and a warning is recorded.
fn zero_policy(named: &mut [(&str, FSet)], opts: VerifyOptions, notes: &mut Vec<String>) {
    for (name, set) in named.iter_mut() {
        if !set.contains_zero() {
            continue;
        }
        if opts.strict {
            let before = set.len();
            *set = set.without_zero();
            notes.push(format!("strict: removed 0 from {name}, |{name}| {before} -> {}", set.len()));
        } else {
            notes.push(format!("warning: 0 ∈ {name}; sizes computed with 0 retained"));
        }
    }
}

fn same_ctx(sets: &[&FSet]) -> Result<FieldCtx> {
    let ctx = sets[0].ctx();
    for s in sets {
        if s.ctx() != ctx {
            return Err(Error::CtxMismatch);
        }
    }
    Ok(ctx)
}

fn p_squared(ctx: FieldCtx) -> Option<BigUint> {
    ctx.modulus().map(|p| big(p).pow(2))
}

fn le_p2(value: BigUint, ctx: FieldCtx) -> bool {
    p_squared(ctx).is_none_or(|p2| value <= p2)
}

/// Ratio histogram `r_{X/Y}` with 0 dropped from the divisor side.
fn ratio_hist(x: &FSet, y: &FSet, name: &str, notes: &mut Vec<String>) -> Result<RepHistogram> {
    if y.contains_zero() {
        notes.push(format!("warning: energy computed over {name} \\ {{0}}"));
        return rep_function(x, &y.without_zero(), SetOp::Ratio);
    }
    rep_function(x, y, SetOp::Ratio)
}

/// `E_4^*(A,D)` against `min{|C(A+1)|²|D|³/|C|, |C(A+1)|³|D|²/|C|}`.
pub fn verify_e4(a: &FSet, c: &FSet, d: &FSet, opts: VerifyOptions) -> Result<VerificationReport> {
    let ctx = same_ctx(&[a, c, d])?;
    let inputs = field_inputs(ctx, &[("A", a), ("C", c), ("D", d)]);
    let mut notes = Vec::new();
    let mut named = [("A", a.clone()), ("C", c.clone()), ("D", d.clone())];
    zero_policy(&mut named, opts, &mut notes);
    let [(_, a), (_, c), (_, d)] = named;
    if c.is_empty() {
        return Err(Error::SetTooSmall("C is empty".into()));
    }
    let k = c.shifted_product(&a, &ctx.one())?.len();
    let lhs = ratio_hist(&a, &d, "D", &mut notes)?.energy_int(4);
    let first = pow(k, 2) * pow(d.len(), 3);
    let second = pow(k, 3) * pow(d.len(), 2);
    let min = first.clone().min(second.clone());
    let rhs = if (&min % c.len()).is_zero() {
        Quantity::Int(&min / c.len())
    } else {
        Quantity::Real(biguint_to_f64(&min) / c.len() as f64)
    };
    let mut report = VerificationReport::new("e4", inputs, Quantity::Int(lhs), rhs);
    report.flags.insert(
        "|A|^2|C(A+1)| <= |D||C|^3".into(),
        pow(a.len(), 2) * k <= big(d.len()) * pow(c.len(), 3),
    );
    report.flags.insert(
        "|A||C(A+1)|^2 <= |D|^2|C|^3".into(),
        big(a.len()) * pow(k, 2) <= pow(d.len(), 2) * pow(c.len(), 3),
    );
    report.flags.insert(
        "|A||C||D|^2 <= p^2".into(),
        le_p2(big(a.len()) * big(c.len()) * pow(d.len(), 2), ctx),
    );
    report.metrics.insert("|C(A+1)|".into(), k as f64);
    report.metrics.insert("bound_first".into(), biguint_to_f64(&first) / c.len() as f64);
    report.metrics.insert("bound_second".into(), biguint_to_f64(&second) / c.len() as f64);
    report.notes = notes;
    Ok(report)
}

/// `E^*(A,D)` against `|C(A+1)|^{3/2}|D|^{3/2}/|C|^{1/2}`.
pub fn verify_e2(a: &FSet, c: &FSet, d: &FSet, opts: VerifyOptions) -> Result<VerificationReport> {
    let ctx = same_ctx(&[a, c, d])?;
    let inputs = field_inputs(ctx, &[("A", a), ("C", c), ("D", d)]);
    let mut notes = Vec::new();
    let mut named = [("A", a.clone()), ("C", c.clone()), ("D", d.clone())];
    zero_policy(&mut named, opts, &mut notes);
    let [(_, a), (_, c), (_, d)] = named;
    if c.is_empty() {
        return Err(Error::SetTooSmall("C is empty".into()));
    }
    let k = c.shifted_product(&a, &ctx.one())?.len() as f64;
    let lhs = ratio_hist(&a, &d, "D", &mut notes)?.energy_int(2);
    let rhs = (k * d.len() as f64).powf(1.5) / (c.len() as f64).sqrt();
    let mut report = VerificationReport::new("e2", inputs, Quantity::Int(lhs), Quantity::Real(rhs));
    report.flags.insert(
        "|A||C||D|min(|C|,|D|) <= p^2".into(),
        le_p2(big(a.len()) * big(c.len()) * big(d.len()) * big(c.len().min(d.len())), ctx),
    );
    report.metrics.insert("|C(A+1)|".into(), k);
    report.notes = notes;
    Ok(report)
}

/// Set sizes entering the shifted product bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftSizes {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub ab: usize,
    pub c_a1: usize,
    pub d_b1: usize,
}

impl ShiftSizes {
    pub fn of(a: &FSet, b: &FSet, c: &FSet, d: &FSet) -> Result<Self> {
        let ctx = same_ctx(&[a, b, c, d])?;
        Ok(ShiftSizes {
            a: a.len(),
            b: b.len(),
            c: c.len(),
            d: d.len(),
            ab: a.product(b)?.len(),
            c_a1: c.shifted_product(a, &ctx.one())?.len(),
            d_b1: d.shifted_product(b, &ctx.neg(&ctx.one()))?.len(),
        })
    }

    /// `|AB|^8 |C(A+1)|^2 |D(B-1)|^8`
    pub fn lhs(&self) -> BigUint {
        pow(self.ab, 8) * pow(self.c_a1, 2) * pow(self.d_b1, 8)
    }

    /// `|B|^13 |A|^5 |C|^3 |D|`
    pub fn rhs(&self) -> BigUint {
        pow(self.b, 13) * pow(self.a, 5) * pow(self.c, 3) * big(self.d)
    }
}

/// `|AB|^8|C(A+1)|^2|D(B-1)|^8` against `|B|^13|A|^5|C|^3|D|`.
pub fn verify_shift(a: &FSet, b: &FSet, c: &FSet, d: &FSet, opts: VerifyOptions) -> Result<VerificationReport> {
    let ctx = same_ctx(&[a, b, c, d])?;
    let inputs = field_inputs(ctx, &[("A", a), ("B", b), ("C", c), ("D", d)]);
    let mut notes = Vec::new();
    let mut named = [("A", a.clone()), ("B", b.clone()), ("C", c.clone()), ("D", d.clone())];
    zero_policy(&mut named, opts, &mut notes);
    let [(_, a), (_, b), (_, c), (_, d)] = named;
    let s = ShiftSizes::of(&a, &b, &c, &d)?;
    let mut report = VerificationReport::new("shift", inputs, Quantity::Int(s.lhs()), Quantity::Int(s.rhs()));
    report.flags = shift_flags(ctx, &s);
    for (name, v) in [
        ("|AB|", s.ab),
        ("|C(A+1)|", s.c_a1),
        ("|D(B-1)|", s.d_b1),
    ] {
        report.metrics.insert(name.into(), v as f64);
    }
    report.notes = notes;
    Ok(report)
}

fn shift_flags(ctx: FieldCtx, s: &ShiftSizes) -> BTreeMap<String, bool> {
    let largest = s.a.max(s.b).max(s.c).max(s.d) as u64;
    BTreeMap::from([
        ("|C(A+1)||A| <= |C|^3".into(), big(s.c_a1) * big(s.a) <= pow(s.c, 3)),
        ("|C(A+1)|^2 <= |A||C|^3".into(), pow(s.c_a1, 2) <= big(s.a) * pow(s.c, 3)),
        ("|B| <= |D|".into(), s.b <= s.d),
        ("|A|,|B|,|C|,|D| < p^(1/4)".into(), ctx.char_guard(largest, GuardExponent::Quarter)),
    ])
}

fn exponent(size: usize, base: usize) -> Option<f64> {
    (base >= 2 && size >= 1).then(|| ((size as f64).ln() / (base as f64).ln() * 1e4).round() / 1e4)
}

/// Both growth statements for a single set `A`, with the two
/// specializations of the shifted product bound attached as sub-reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReports {
    pub shift_product: VerificationReport,
    pub two_products: VerificationReport,
}

pub const COROLLARY_EXPONENT: f64 = 11.0 / 9.0;

pub fn verify_corollary(a: &FSet, opts: VerifyOptions) -> Result<CorollaryReports> {
    if a.is_empty() {
        return Err(Error::SetTooSmall("A is empty".into()));
    }
    let ctx = a.ctx();
    let one = ctx.one();
    let inputs = field_inputs(ctx, &[("A", a)]);
    let mut notes = Vec::new();
    let mut named = [("A", a.clone())];
    zero_policy(&mut named, opts, &mut notes);
    let [(_, a)] = named;
    let n = a.len();
    let target = (n as f64).powf(COROLLARY_EXPONENT);
    let guard = ctx.char_guard(n as u64, GuardExponent::Quarter);
    let a1 = a.shift(&one);

    let shifted = a.shifted_product(&a, &one)?.len();
    if shifted < n {
        return Err(Error::HardAssertion(format!("|A(A+1)| = {shifted} < |A| = {n}")));
    }
    let mut first = VerificationReport::new(
        "corollary.shift_product",
        inputs.clone(),
        Quantity::int(shifted as u64),
        Quantity::Real(target),
    );
    first.flags.insert("|A| < p^(1/4)".into(), guard);
    first.metrics.insert("|A(A+1)|".into(), shifted as f64);
    if let Some(e) = exponent(shifted, n) {
        first.metrics.insert("exponent".into(), e);
    }
    first.notes = notes.clone();
    first.notes.push("specialization B = A+1, C = A, D = A+1".into());
    first.sub_reports.push(verify_shift(&a, &a1, &a, &a1, opts)?);

    let aa = a.product(&a)?.len();
    let bb = a1.product(&a1)?.len();
    let mut second = VerificationReport::new(
        "corollary.two_products",
        inputs,
        Quantity::int((aa + bb) as u64),
        Quantity::Real(target),
    );
    second.flags.insert("|A| < p^(1/4)".into(), guard);
    second.metrics.insert("|AA|".into(), aa as f64);
    second.metrics.insert("|(A+1)(A+1)|".into(), bb as f64);
    if let Some(e) = exponent(aa + bb, n) {
        second.metrics.insert("exponent".into(), e);
    }
    second.notes = notes;
    second.notes.push("specialization B = -A, C = D = A+1".into());
    second.sub_reports.push(verify_shift(&a, &a.negate(), &a1, &a1, opts)?);

    Ok(CorollaryReports { shift_product: first, two_products: second })
}

/// Solutions of `a/a' = ab/(a'b) = ab'/(a'b')` counted over `a, a' ∈ A'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrivialSolutions {
    /// `N = Σ_{a,a' ∈ A', a/a' ∈ Q} |{b ∈ B : ab, a'b ∈ P}|²`
    pub n: u64,
    /// Number of pairs `(a, a') ∈ A'²` with `a/a' ∈ Q`.
    pub pairs: u64,
    /// Smallest `|{b : ab, a'b ∈ P}|` over all pairs in `A'²`.
    pub min_intersection: Option<u64>,
    /// `|B|²|Q|Δ`
    #[serde(serialize_with = "ser_big")]
    pub lower_bound_times_9: BigUint,
    /// `9N ≥ |B|²|Q|Δ`
    pub holds: bool,
    /// Whether the hypotheses of the lower bound hold for these inputs.
    pub premise: bool,
}

/// `N` for a dyadic bucket `Q` of `r_{A'/A'}` with `Δ = τ`. Asserts
/// `N ≥ |B|²|Q|Δ/9` whenever `A'` is popular relative to `(B, P)` and every
/// `q ∈ Q` has `r_{A'/A'}(q) ≥ Δ`.
pub fn trivial_solution_count(a_prime: &FSet, b: &FSet, q: &DyadicBucket, p: &FSet) -> Result<TrivialSolutions> {
    let ctx = same_ctx(&[a_prime, b, &q.members, p])?;
    if a_prime.contains_zero() {
        return Err(Error::ZeroElement("A'".into()));
    }
    let rows: Vec<Vec<bool>> = a_prime
        .iter()
        .map(|x| b.iter().map(|y| p.contains(&ctx.mul(x, y))).collect())
        .collect();
    let mut n = 0u64;
    let mut pairs = 0u64;
    let mut min_intersection: Option<u64> = None;
    for (i, x) in a_prime.iter().enumerate() {
        for (j, y) in a_prime.iter().enumerate() {
            let common = rows[i].iter().zip(&rows[j]).filter(|(s, t)| **s && **t).count() as u64;
            min_intersection = Some(min_intersection.map_or(common, |m| m.min(common)));
            if q.members.contains(&ctx.div(x, y)?) {
                pairs += 1;
                n += common * common;
            }
        }
    }
    let bound = pow(b.len(), 2) * big(q.len()) * big(q.tau);
    let holds = big(9u64) * big(n) >= bound;
    let popular_rows = rows
        .iter()
        .all(|r| 3 * r.iter().filter(|h| **h).count() >= 2 * b.len());
    let bucket_rows = {
        let h = rep_function(a_prime, a_prime, SetOp::Ratio)?;
        q.members.iter().all(|x| h.get(x) >= q.tau)
    };
    let premise = popular_rows && bucket_rows;
    if premise && !holds {
        return Err(Error::HardAssertion(format!("9N = {} < |B|²|Q|Δ = {bound}", 9 * n)));
    }
    Ok(TrivialSolutions { n, pairs, min_intersection, lower_bound_times_9: bound, holds, premise })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivClass {
    /// Lexicographically smallest member `(a, a', b, b')`.
    pub representative: [Element; 4],
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivClassTable {
    /// Classes whose members satisfy `a/a' ∈ Q` and `ab, a'b, ab', a'b' ∈ P`.
    pub classes: Vec<EquivClass>,
    pub q: FSet,
    pub p: FSet,
    /// Number of classes in all of `A² × B²`.
    pub total_classes: u64,
    /// `Σ |class|²` over all classes of `A² × B²`.
    #[serde(serialize_with = "ser_big")]
    pub total_square_sum: BigUint,
}

impl EquivClassTable {
    /// `|X|`
    pub fn count(&self) -> u64 {
        self.classes.len() as u64
    }

    /// Number of condition-satisfying quadruples.
    pub fn member_count(&self) -> u64 {
        self.classes.iter().map(|c| c.size).sum()
    }

    pub fn square_sum(&self) -> BigUint {
        self.classes.iter().map(|c| big(c.size) * big(c.size)).sum()
    }
}

/// `(a/a', ab, ab')`, constant on each scaling orbit.
type ClassKey = (Element, Element, Element);

/// Classes of `A² × B²` under `(a, a', b, b') ~ (λa, λa', b/λ, b'/λ)`.
///
/// Two quadruples are equivalent exactly when they share `a/a'`, `ab` and
/// `ab'`, which is the key used here. Every class is checked to be uniform
/// with respect to the conditions.
pub fn equiv_classes(a: &FSet, b: &FSet, q: &FSet, p: &FSet) -> Result<EquivClassTable> {
    let ctx = same_ctx(&[a, b, q, p])?;
    if a.contains_zero() {
        return Err(Error::ZeroElement("A".into()));
    }
    if b.contains_zero() {
        return Err(Error::ZeroElement("B".into()));
    }
    let space = (a.len() as u128).pow(2) * (b.len() as u128).pow(2);
    if space > QUADRUPLE_LIMIT {
        return Err(Error::TooLarge(format!("|A|²|B|² = {space} quadruples exceeds {QUADRUPLE_LIMIT}")));
    }
    // key -> (smallest member, size, satisfying members)
    let mut groups: HashMap<ClassKey, ([Element; 4], u64, u64)> = HashMap::new();
    for x in a {
        let xb: Vec<Element> = b.iter().map(|y| ctx.mul(x, y)).collect();
        for x2 in a {
            let ratio = ctx.div(x, x2)?;
            let ratio_ok = q.contains(&ratio);
            let x2b: Vec<Element> = b.iter().map(|y| ctx.mul(x2, y)).collect();
            for (i, y) in b.iter().enumerate() {
                let first_ok = p.contains(&xb[i]) && p.contains(&x2b[i]);
                for (j, y2) in b.iter().enumerate() {
                    let ok = ratio_ok && first_ok && p.contains(&xb[j]) && p.contains(&x2b[j]);
                    let member = [x.clone(), x2.clone(), y.clone(), y2.clone()];
                    let entry = groups
                        .entry((ratio.clone(), xb[i].clone(), xb[j].clone()))
                        .or_insert_with(|| (member.clone(), 0, 0));
                    if member < entry.0 {
                        entry.0 = member;
                    }
                    entry.1 += 1;
                    entry.2 += ok as u64;
                }
            }
        }
    }
    let mut classes = Vec::new();
    let mut total_square_sum = BigUint::zero();
    for (rep, size, satisfying) in groups.values() {
        total_square_sum += big(*size) * big(*size);
        if *satisfying != 0 && satisfying != size {
            return Err(Error::HardAssertion(format!(
                "conditions not invariant on the class of {rep:?}: {satisfying} of {size} members satisfy them"
            )));
        }
        if *satisfying == *size {
            classes.push(EquivClass { representative: rep.clone(), size: *size });
        }
    }
    classes.sort_by(|x, y| x.representative.cmp(&y.representative));
    Ok(EquivClassTable {
        classes,
        q: q.clone(),
        p: p.clone(),
        total_classes: groups.len() as u64,
        total_square_sum,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyComparison {
    /// `Σ |class|²` over the table's classes.
    #[serde(serialize_with = "ser_big")]
    pub lhs: BigUint,
    /// `Σ_x r_{A/A}(x)² r_{B/B}(x)²`
    #[serde(serialize_with = "ser_big")]
    pub rhs: BigUint,
    pub holds: bool,
}

/// `Σ |class|² ≤ Σ_x r_{A/A}(x)² r_{B/B}(x)²`. A violation is a hard error.
pub fn equiv_energy_inequality(a: &FSet, b: &FSet, table: &EquivClassTable) -> Result<EnergyComparison> {
    let lhs = table.square_sum();
    let rhs = mixed_square_sum(a, b)?;
    if lhs > rhs {
        return Err(Error::HardAssertion(format!("Σ|class|² = {lhs} > Σ r² r² = {rhs}")));
    }
    Ok(EnergyComparison { holds: true, lhs, rhs })
}

fn mixed_square_sum(a: &FSet, b: &FSet) -> Result<BigUint> {
    let ha = rep_function(a, a, SetOp::Ratio)?;
    let hb = rep_function(b, b, SetOp::Ratio)?;
    Ok(ha
        .counts()
        .iter()
        .map(|(x, r)| {
            let s = hb.get(x);
            big(*r) * big(*r) * big(s) * big(s)
        })
        .sum())
}

/// Result of one dyadic pigeonhole over a weighted histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pigeonhole {
    pub members: FSet,
    pub tau: u64,
    /// Number of nonempty dyadic levels.
    pub levels: u64,
    /// `Σ_x r(x) F(x)`
    #[serde(serialize_with = "ser_big")]
    pub total: BigUint,
    /// `Σ_{x ∈ S} r(x) F(x)` for the chosen level `S`.
    #[serde(serialize_with = "ser_big")]
    pub contribution: BigUint,
    /// `Σ_{x ∈ S} F(x)`
    #[serde(serialize_with = "ser_big")]
    pub inner: BigUint,
}

impl Pigeonhole {
    /// `total ≤ levels · contribution ≤ 2·levels·τ·inner`
    fn bound(&self) -> BigUint {
        big(2u64) * big(self.levels) * big(self.tau) * &self.inner
    }
}

/// Splits `Σ r(x)F(x)` into dyadic levels of `r` and keeps the level with the
/// largest contribution; ties go to the smaller `τ`.
fn pigeonhole(h: &RepHistogram, f: impl Fn(&Element) -> u64 + Sync) -> Result<Pigeonhole> {
    let values: Vec<u64> = h.counts().par_iter().map(|(x, _)| f(x)).collect();
    let buckets = dyadic_buckets(h);
    let mut total = BigUint::zero();
    let mut best: Option<(BigUint, BigUint, &DyadicBucket)> = None;
    for bucket in &buckets {
        let mut contribution = BigUint::zero();
        let mut inner = BigUint::zero();
        for x in &bucket.members {
            let i = h.counts().binary_search_by(|(k, _)| k.cmp(x)).expect("member of support");
            contribution += big(h.counts()[i].1) * big(values[i]);
            inner += big(values[i]);
        }
        total += &contribution;
        if best.as_ref().is_none_or(|(c, _, _)| contribution > *c) {
            best = Some((contribution, inner, bucket));
        }
    }
    let (contribution, inner, bucket) = best.ok_or(Error::EmptyHistogram)?;
    Ok(Pigeonhole {
        members: bucket.members.clone(),
        tau: bucket.tau,
        levels: buckets.len() as u64,
        total,
        contribution,
        inner,
    })
}

fn check_budget(what: &str, work: u128) -> Result<()> {
    if work > CHAIN_LIMIT {
        return Err(Error::TooLarge(format!("{what} needs {work} lookups, limit {CHAIN_LIMIT}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TraceOptions {
    /// Run the refinement and popularity steps below their guarantee regime.
    pub force: bool,
    pub verify: VerifyOptions,
}

/// Every intermediate object of the proof chain plus its step ledger.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTrace {
    pub inputs: BTreeMap<String, String>,
    /// `A₁`, the refined subset that plays the role of `A` in the chain.
    pub refined: FSet,
    pub refine_iterations: usize,
    pub refine_converged: bool,
    pub popular: FSet,
    pub popular_subset: FSet,
    pub q: FSet,
    pub delta: u64,
    pub n: u64,
    pub classes: u64,
    pub r1: FSet,
    pub delta1: u64,
    pub r2: FSet,
    pub delta1_prime: u64,
    pub s1: FSet,
    pub delta2: u64,
    pub s2: FSet,
    pub delta2_prime: u64,
    pub flags: BTreeMap<String, bool>,
    pub steps: Vec<TraceStep>,
    pub notes: Vec<String>,
    /// The chain stopped early because an intermediate set was empty.
    pub degenerate: bool,
}

impl ProofTrace {
    pub fn exact_steps(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| s.kind == StepKind::Exact)
    }

    pub fn step(&self, name: &str) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.name == name)
    }

    /// Report whose headline inequality is the final assembled bound.
    pub fn into_report(self) -> VerificationReport {
        let (lhs, rhs) = self
            .step("final_assembly")
            .map(|s| (s.lhs.clone(), s.rhs.clone()))
            .unwrap_or((Quantity::int(0u64), Quantity::int(0u64)));
        let mut report = VerificationReport::new("shift.trace", self.inputs, lhs, rhs);
        report.flags = self.flags;
        report.notes = self.notes;
        report.trace = Some(self.steps);
        report
    }
}

struct Chain {
    steps: Vec<TraceStep>,
}

impl Chain {
    fn push(&mut self, step: TraceStep) {
        self.steps.push(step);
    }

    fn exact(&mut self, name: &str, rel: Relation, lhs: impl Into<BigUint>, rhs: impl Into<BigUint>, note: &str) {
        self.push(TraceStep::exact(name, rel, Quantity::Int(lhs.into()), Quantity::Int(rhs.into()), note));
    }

    fn exact_real(&mut self, name: &str, rel: Relation, lhs: f64, rhs: f64, note: &str) {
        self.push(TraceStep::exact_tol(name, rel, Quantity::Real(lhs), Quantity::Real(rhs), ENERGY_REL_TOL, note));
    }

    fn asymptotic(&mut self, name: &str, lhs: f64, rhs: f64, log_power: u32, note: &str) {
        self.push(TraceStep::asymptotic(name, Quantity::Real(lhs), Quantity::Real(rhs), log_power, note));
    }

    fn asymptotic_ln(&mut self, name: &str, ln_lhs: f64, ln_rhs: f64, log_power: u32, note: &str) {
        let mut step = TraceStep::asymptotic(
            name,
            Quantity::Real(ln_lhs.exp()),
            Quantity::Real(ln_rhs.exp()),
            log_power,
            note,
        );
        step.ratio = (ln_lhs - ln_rhs).exp();
        self.push(step);
    }
}

fn singleton(ctx: FieldCtx) -> FSet {
    FSet::new(ctx, [ctx.one()]).expect("one element")
}

/// Full trace of the argument for
/// `|AB|^8 |C(A+1)|^2 |D(B-1)|^8 ≳ |B|^13 |A|^5 |C|^3 |D|`.
///
/// Exact steps that fail produce [`Error::HardAssertion`].
pub fn proof_trace_shift(a: &FSet, b: &FSet, c: &FSet, d: &FSet, opts: TraceOptions) -> Result<ProofTrace> {
    let ctx = same_ctx(&[a, b, c, d])?;
    let inputs = field_inputs(ctx, &[("A", a), ("B", b), ("C", c), ("D", d)]);
    let mut notes = Vec::new();
    let mut named = [("A", a.clone()), ("B", b.clone()), ("C", c.clone()), ("D", d.clone())];
    zero_policy(&mut named, opts.verify, &mut notes);
    let [(_, mut a), (_, mut b), (_, c), (_, d)] = named;
    for (name, set) in [("A", &mut a), ("B", &mut b)] {
        if set.contains_zero() {
            *set = set.without_zero();
            notes.push(format!("0 removed from {name}: the chain divides by its elements"));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::SetTooSmall("A and B must contain a nonzero element".into()));
    }
    let mut chain = Chain { steps: Vec::new() };

    // Refinement: A₁ ⊆ A with E_{4/3}(A₁') ≥ E_{4/3}(A₁)/4.
    let refinement = refine_43(&a, &b, opts.force)?;
    let a1 = refinement.subset.clone();
    notes.push(format!(
        "refinement: |A| = {} -> |A₁| = {} after {} iterations (converged: {})",
        a.len(),
        a1.len(),
        refinement.iterations,
        refinement.converged
    ));
    let log_size = a.len();
    let dec = decompose_with(&a1, &b, log_size, true)?;
    let a = a1;
    let sizes = ShiftSizes::of(&a, &b, &c, &d)?;
    let mut flags = shift_flags(ctx, &sizes);
    flags.insert("refinement_converged".into(), refinement.converged);

    chain.exact(
        "pair_partition",
        Relation::Eq,
        dec.covered_pairs + dec.uncovered_pairs(),
        big(a.len()) * big(b.len()),
        "pairs with ab ∈ P plus pairs with ab ∉ P",
    );
    let ln_l = (log_size.max(1) as f64).ln();
    chain.push(TraceStep {
        holds: Some(dec.uncovered_bound_holds()),
        ..TraceStep::exact_tol(
            "uncovered_pairs",
            Relation::Le,
            Quantity::int(dec.uncovered_pairs()),
            Quantity::Real((a.len() * b.len()) as f64 / ln_l),
            0.0,
            "Σ_{x ∉ P} r_AB(x) ≤ |A||B|/ln L, certified logarithm",
        )
    });
    chain.push(TraceStep {
        holds: Some(dec.subset_bound_holds() || ln_l <= 3.0),
        ..TraceStep::exact_tol(
            "popular_subset_size",
            Relation::Ge,
            Quantity::int(dec.popular_subset.len() as u64),
            Quantity::Real(((1.0 - 3.0 / ln_l) * a.len() as f64).max(0.0)),
            0.0,
            "|A'| ≥ (1 - 3/ln L)|A|",
        )
    });

    let mut trace = ProofTrace {
        inputs,
        refined: a.clone(),
        refine_iterations: refinement.iterations,
        refine_converged: refinement.converged,
        popular: dec.popular.clone(),
        popular_subset: dec.popular_subset.clone(),
        q: FSet::empty(ctx),
        delta: 0,
        n: 0,
        classes: 0,
        r1: FSet::empty(ctx),
        delta1: 0,
        r2: FSet::empty(ctx),
        delta1_prime: 0,
        s1: FSet::empty(ctx),
        delta2: 0,
        s2: FSet::empty(ctx),
        delta2_prime: 0,
        flags,
        steps: Vec::new(),
        notes,
        degenerate: false,
    };
    let a_prime = dec.popular_subset.clone();
    let p = dec.popular.clone();
    if a_prime.is_empty() {
        trace.degenerate = true;
        trace.notes.push("A' is empty; the remaining chain is vacuous".into());
        return finish(trace, chain);
    }

    let e43_a = energy_43(&a)?;
    let e43_ap = energy_43(&a_prime)?;
    chain.asymptotic(
        "refined_energy",
        e43_a,
        e43_ap,
        0,
        "E_{4/3}(A) ≪ E_{4/3}(A')",
    );

    // Q: the richest 4/3-bucket of r_{A'/A'}.
    let h_ap = rep_function(&a_prime, &a_prime, SetOp::Ratio)?;
    let q_bucket = richest_bucket(&h_ap, Moment::FOUR_THIRDS)?;
    let delta = q_bucket.tau;
    let q = q_bucket.members.clone();
    let q_weight = q.len() as f64 * (delta as f64) * (delta as f64).cbrt();
    chain.exact_real(
        "q_bucket_upper",
        Relation::Le,
        q_weight,
        e43_ap,
        "|Q|Δ^{4/3} ≤ E_{4/3}(A')",
    );
    chain.exact_real(
        "q_bucket_pigeonhole",
        Relation::Ge,
        q_weight,
        DyadicBucket::pigeonhole_floor(&h_ap, Moment::FOUR_THIRDS),
        "|Q|Δ^{4/3} ≥ E_{4/3}(A') / (2^{4/3} · levels)",
    );
    chain.asymptotic("q_bucket_rich", e43_ap, q_weight, 1, "E_{4/3}(A') ≲ |Q|Δ^{4/3}");

    // N and the equivalence classes.
    let sol = trivial_solution_count(&a_prime, &b, &q_bucket, &p)?;
    chain.exact(
        "n_lower_bound",
        Relation::Ge,
        big(9u64) * big(sol.n),
        sol.lower_bound_times_9.clone(),
        "9N ≥ |B|²|Q|Δ",
    );
    let table = equiv_classes(&a, &b, &q, &p)?;
    let x = table.count();
    chain.exact(
        "n_class_sum",
        Relation::Le,
        sol.n,
        table.member_count(),
        "N ≤ Σ over satisfying classes of |class|, equality when A' = A",
    );
    let sat_sq = table.square_sum();
    chain.exact(
        "cauchy_schwarz_classes",
        Relation::Le,
        big(sol.n) * big(sol.n),
        big(x) * &sat_sq,
        "N² ≤ |X| Σ |class|²",
    );
    chain.exact(
        "complete_class_sum",
        Relation::Le,
        sat_sq,
        table.total_square_sum.clone(),
        "Σ over satisfying classes ≤ Σ over all classes",
    );
    let mixed = mixed_square_sum(&a, &b)?;
    chain.exact(
        "equiv_energy",
        Relation::Le,
        table.total_square_sum.clone(),
        mixed.clone(),
        "Σ |class|² ≤ Σ_x r_{A/A}(x)² r_{B/B}(x)²",
    );
    let e4_a = rep_function(&a, &a, SetOp::Ratio)?.energy_int(4);
    let e4_b = rep_function(&b, &b, SetOp::Ratio)?.energy_int(4);
    chain.exact(
        "cauchy_schwarz_fourth_energies",
        Relation::Le,
        &mixed * &mixed,
        &e4_a * &e4_b,
        "(Σ r_{A/A}² r_{B/B}²)² ≤ E_4(A) E_4(B)",
    );
    let (na, nb, nc, nd) = (a.len() as f64, b.len() as f64, c.len() as f64, d.len() as f64);
    let (k_c, k_d) = (sizes.c_a1 as f64, sizes.d_b1 as f64);
    chain.asymptotic(
        "e4_a_bound",
        biguint_to_f64(&e4_a),
        k_c * k_c * na.powi(3) / nc,
        1,
        "E_4(A) ≲ |C(A+1)|²|A|³/|C|",
    );
    chain.asymptotic(
        "e4_b_bound",
        biguint_to_f64(&e4_b),
        k_d * k_d * nb.powi(3) / nd,
        1,
        "E_4(B) ≲ |D(B-1)|²|B|³/|D|",
    );
    chain.asymptotic_ln(
        "x_lower",
        2.0 * (q.len() as f64).ln() + 2.0 * (delta as f64).ln() + 4.0 * nb.ln(),
        (x.max(1) as f64).ln() + k_c.ln() + 1.5 * na.ln() + k_d.ln() + 1.5 * nb.ln() - 0.5 * nc.ln() - 0.5 * nd.ln(),
        2,
        "|Q|²Δ²|B|⁴ ≲ |X| |C(A+1)||A|^{3/2}|D(B-1)||B|^{3/2} / (|C||D|)^{1/2}",
    );

    // |X| against the reduced equation s/t = u/v ∈ Q over P.
    let h_pp = rep_function(&p, &p, SetOp::Ratio)?;
    let reduced: BigUint = q.iter().map(|w| pow(h_pp.get(w) as usize, 2)).sum();
    chain.exact("x_reduced_equation", Relation::Le, x, reduced.clone(), "|X| ≤ Σ_{q ∈ Q} r_{P/P}(q)²");
    let h_ab = rep_function(&a, &b, SetOp::Product)?;
    let h_abab = h_ab.combine(&h_ab, SetOp::Ratio)?;
    let m: BigUint = q.iter().map(|w| pow(h_abab.get(w) as usize, 2)).sum();
    let scale = (ln_l * sizes.ab as f64 / (na * nb)).powi(4);
    chain.exact_real(
        "popularity_transfer",
        Relation::Le,
        biguint_to_f64(&reduced),
        scale * biguint_to_f64(&m),
        "Σ_Q r_{P/P}² ≤ (ln L |AB|/(|A||B|))⁴ Σ_Q r_{AB/AB}²",
    );

    // R₁, R₂ ⊆ BA/A from r_{BA/A}, which counts triples (b, a, a').
    let h_ba_a = h_ab.combine(&rep_function(&a, &singleton(ctx), SetOp::Product)?, SetOp::Ratio)?;
    let bs: Vec<Element> = b.iter().cloned().collect();
    let support = h_ba_a.len() as u128;
    check_budget("R₁ pigeonhole", support * (bs.len() as u128).pow(2))?;
    let f_r = |xv: &Element| -> u64 {
        let mut acc = 0u64;
        for b2 in &bs {
            let w = ctx.div(xv, b2).expect("B has no zero");
            if !q.contains(&w) {
                continue;
            }
            for b4 in &bs {
                acc += h_ba_a.get(&ctx.mul(&w, b4));
            }
        }
        acc
    };
    let ph1 = pigeonhole(&h_ba_a, f_r)?;
    chain.exact("m_two_ways", Relation::Eq, ph1.total.clone(), m.clone(), "Σ_x r_{BA/A}(x) F(x) = Σ_Q r_{AB/AB}²");
    chain.exact("dyadic_r1", Relation::Le, ph1.total.clone(), ph1.bound(), "M ≤ 2·levels·Δ₁·M₁");
    let r1 = ph1.members.clone();
    let g_r = |yv: &Element| -> u64 {
        let mut acc = 0u64;
        for b4 in &bs {
            let w = ctx.div(yv, b4).expect("B has no zero");
            if !q.contains(&w) {
                continue;
            }
            acc += bs.iter().filter(|b2| r1.contains(&ctx.mul(&w, b2))).count() as u64;
        }
        acc
    };
    let ph2 = pigeonhole(&h_ba_a, g_r)?;
    chain.exact("m1_two_ways", Relation::Eq, ph2.total.clone(), ph1.inner.clone(), "Σ_y r(y) G(y) = M₁");
    chain.exact("dyadic_r2", Relation::Le, ph2.total.clone(), ph2.bound(), "M₁ ≤ 2·levels·Δ₁'·T");
    let r2 = ph2.members.clone();
    let h_r1b = rep_function(&r1, &b, SetOp::Ratio)?;
    let h_r2b = rep_function(&r2, &b, SetOp::Ratio)?;
    let t_hist: BigUint = q.iter().map(|w| big(h_r1b.get(w)) * big(h_r2b.get(w))).sum();
    let t = ph2.inner.clone();
    chain.exact("t_two_ways", Relation::Eq, t.clone(), t_hist, "T = Σ_Q r_{R₁/B} r_{R₂/B}");
    let sq1: BigUint = q.iter().map(|w| pow(h_r1b.get(w) as usize, 2)).sum();
    let sq2: BigUint = q.iter().map(|w| pow(h_r2b.get(w) as usize, 2)).sum();
    chain.exact("cauchy_schwarz_t", Relation::Le, &t * &t, &sq1 * &sq2, "T² ≤ Σ_Q r_{R₁/B}² Σ_Q r_{R₂/B}²");
    let e4_br1 = h_r1b.energy_int(4);
    let e4_br2 = h_r2b.energy_int(4);
    chain.exact(
        "cauchy_schwarz_t_fourth",
        Relation::Le,
        t.pow(4),
        pow(q.len(), 2) * &e4_br1 * &e4_br2,
        "T⁴ ≤ |Q|² E_4(B,R₁) E_4(B,R₂)",
    );
    chain.asymptotic_ln(
        "x_upper",
        (x.max(1) as f64).ln(),
        4.0 * (sizes.ab as f64).ln() - 4.0 * na.ln() - 4.0 * nb.ln()
            + (ph1.tau as f64).ln()
            + (ph2.tau as f64).ln()
            + big_ln(&t),
        6,
        "|X| ≲ |AB|⁴/(|A|⁴|B|⁴) Δ₁Δ₁' T",
    );
    let hyp_nonzero_d = d.iter().any(|e| !e.is_zero());
    for (i, (r, e4)) in [(&r1, &e4_br1), (&r2, &e4_br2)].into_iter().enumerate() {
        let tag = i + 1;
        let nr = r.len();
        chain.asymptotic(
            &format!("e4_b_r{tag}"),
            biguint_to_f64(e4),
            k_d.powi(3) * (nr as f64).powi(2) / nd,
            1,
            "E_4(B,R) ≲ |D(B-1)|³|R|²/|D|",
        );
        chain.exact(
            &format!("e4_b_r{tag}_trivial"),
            Relation::Le,
            e4.clone(),
            pow(nr, 4) * big(b.len()),
            "E_4(B,R) ≤ |R|⁴|B|",
        );
        let cond1 = pow(b.len(), 2) * big(sizes.d_b1) <= big(nr) * pow(d.len(), 3);
        let cond2 = big(b.len()) * pow(sizes.d_b1, 2) <= pow(nr, 2) * pow(d.len(), 3);
        if b.len() <= d.len() && hyp_nonzero_d && !(cond1 && cond2) {
            chain.exact(
                &format!("e4_b_r{tag}_fallback"),
                Relation::Le,
                pow(nr, 2) * big(b.len()) * big(d.len()),
                pow(sizes.d_b1, 3),
                "|R|²|B||D| ≤ |D(B-1)|³ when an E4 precondition fails and |B| ≤ |D|",
            );
        }
    }

    // S₁, S₂ ⊆ A/A from r_{A/A}.
    let sq_r1: BigUint = r1.iter().map(|v| pow(h_ba_a.get(v) as usize, 2)).sum();
    let sq_r2: BigUint = r2.iter().map(|v| pow(h_ba_a.get(v) as usize, 2)).sum();
    chain.exact(
        "r_weights",
        Relation::Le,
        big(r1.len()) * big(r2.len()) * pow(ph1.tau as usize, 2) * pow(ph2.tau as usize, 2),
        &sq_r1 * &sq_r2,
        "|R₁||R₂|Δ₁²Δ₁'² ≤ Σ_{R₁} r² Σ_{R₂} r²",
    );
    let k = h_ba_a.energy_int(2);
    chain.exact("r1_energy", Relation::Le, sq_r1, k.clone(), "Σ_{R₁} r_{BA/A}² ≤ Σ r_{BA/A}²");
    chain.exact("r2_energy", Relation::Le, sq_r2, k.clone(), "Σ_{R₂} r_{BA/A}² ≤ Σ r_{BA/A}²");
    let h_aa = rep_function(&a, &a, SetOp::Ratio)?;
    check_budget("S₁ pigeonhole", h_aa.len() as u128 * (bs.len() as u128).pow(2))?;
    let f_s = |s1: &Element| -> u64 {
        let mut acc = 0u64;
        for b1 in &bs {
            let sb = ctx.mul(s1, b1);
            for b2 in &bs {
                acc += h_aa.get(&ctx.div(&sb, b2).expect("B has no zero"));
            }
        }
        acc
    };
    let ps1 = pigeonhole(&h_aa, f_s)?;
    chain.exact("k_two_ways", Relation::Eq, ps1.total.clone(), k.clone(), "Σ_s r_{A/A}(s) F(s) = Σ r_{BA/A}²");
    chain.exact("dyadic_s1", Relation::Le, ps1.total.clone(), ps1.bound(), "K ≤ 2·levels·Δ₂·K₁");
    let s1 = ps1.members.clone();
    let g_s = |s2: &Element| -> u64 {
        let mut acc = 0u64;
        for b2 in &bs {
            let sb = ctx.mul(s2, b2);
            for b1 in &bs {
                acc += s1.contains(&ctx.div(&sb, b1).expect("B has no zero")) as u64;
            }
        }
        acc
    };
    let ps2 = pigeonhole(&h_aa, g_s)?;
    chain.exact("k1_two_ways", Relation::Eq, ps2.total.clone(), ps1.inner.clone(), "Σ_s r_{A/A}(s) G(s) = K₁");
    chain.exact("dyadic_s2", Relation::Le, ps2.total.clone(), ps2.bound(), "K₁ ≤ 2·levels·Δ₂'·U");
    let s2 = ps2.members.clone();
    let h_s1b = rep_function(&s1, &b, SetOp::Product)?;
    let h_s2b = rep_function(&s2, &b, SetOp::Product)?;
    let u = ps2.inner.clone();
    let u_hist: BigUint = h_s1b.counts().iter().map(|(v, r)| big(*r) * big(h_s2b.get(v))).sum();
    chain.exact("u_two_ways", Relation::Eq, u.clone(), u_hist, "U = Σ_x r_{S₁B}(x) r_{S₂B}(x)");
    let e2_bs1 = h_s1b.energy_int(2);
    let e2_bs2 = h_s2b.energy_int(2);
    chain.exact("cauchy_schwarz_u", Relation::Le, &u * &u, &e2_bs1 * &e2_bs2, "U² ≤ E(B,S₁) E(B,S₂)");
    for (i, (s, e2, tau)) in [(&s1, &e2_bs1, ps1.tau), (&s2, &e2_bs2, ps2.tau)].into_iter().enumerate() {
        let tag = i + 1;
        let ns = s.len();
        chain.asymptotic(
            &format!("e2_b_s{tag}"),
            biguint_to_f64(e2),
            (ns as f64).powf(1.5) * k_d.powf(1.5) / nd.sqrt(),
            1,
            "E(B,S) ≲ |S|^{3/2}|D(B-1)|^{3/2}/|D|^{1/2}",
        );
        chain.exact(
            &format!("e2_b_s{tag}_trivial"),
            Relation::Le,
            e2.clone(),
            big(b.len()) * pow(ns, 2),
            "E(B,S) ≤ |B||S|²",
        );
        let cond1 = pow(b.len(), 2) * big(sizes.d_b1) <= big(ns) * pow(d.len(), 3);
        let cond2 = big(b.len()) * pow(sizes.d_b1, 2) <= pow(ns, 2) * pow(d.len(), 3);
        if b.len() <= d.len() && hyp_nonzero_d && !(cond1 && cond2) {
            chain.exact(
                &format!("e2_b_s{tag}_fallback"),
                Relation::Le,
                pow(b.len(), 2) * big(d.len()) * big(ns),
                pow(sizes.d_b1, 3),
                "|B|²|D||S| ≤ |D(B-1)|³ when an E2 precondition fails and |B| ≤ |D|",
            );
        }
        chain.exact_real(
            &format!("s{tag}_energy"),
            Relation::Le,
            (tau as f64).powi(2) * (ns as f64).powf(1.5),
            e43_a.powf(1.5),
            "Δ²|S|^{3/2} ≤ E_{4/3}(A)^{3/2}",
        );
    }

    // Final assembly, first with |Q|Δ then with the energies.
    let ln_q = (q.len() as f64).ln();
    let ln_delta = (delta as f64).ln();
    let ln_ab = (sizes.ab as f64).ln();
    chain.asymptotic_ln(
        "final_assembly",
        1.5 * ln_q + 2.0 * ln_delta + 6.5 * nb.ln() + 2.5 * na.ln() + 1.5 * nc.ln() + 0.5 * nd.ln(),
        4.0 * ln_ab + k_c.ln() + 4.0 * k_d.ln() + 1.5 * e43_a.ln(),
        8,
        "|Q|^{3/2}Δ²|B|^{13/2}|A|^{5/2}|C|^{3/2}|D|^{1/2} ≲ |AB|⁴|C(A+1)||D(B-1)|⁴E_{4/3}(A)^{3/2}",
    );
    chain.asymptotic_ln(
        "final_energies",
        3.0 * e43_ap.ln() + 13.0 * nb.ln() + 5.0 * na.ln() + 3.0 * nc.ln() + nd.ln(),
        8.0 * ln_ab + 2.0 * k_c.ln() + 8.0 * k_d.ln() + 3.0 * e43_a.ln(),
        16,
        "E_{4/3}(A')³|B|¹³|A|⁵|C|³|D| ≲ |AB|⁸|C(A+1)|²|D(B-1)|⁸E_{4/3}(A)³",
    );
    chain.push(TraceStep::asymptotic(
        "shift_bound",
        Quantity::Int(sizes.rhs()),
        Quantity::Int(sizes.lhs()),
        16,
        "|B|¹³|A|⁵|C|³|D| ≲ |AB|⁸|C(A+1)|²|D(B-1)|⁸ for the refined A",
    ));

    trace.q = q;
    trace.delta = delta;
    trace.n = sol.n;
    trace.classes = x;
    trace.r1 = r1;
    trace.delta1 = ph1.tau;
    trace.r2 = r2;
    trace.delta1_prime = ph2.tau;
    trace.s1 = s1;
    trace.delta2 = ps1.tau;
    trace.s2 = s2;
    trace.delta2_prime = ps2.tau;
    finish(trace, chain)
}

fn finish(mut trace: ProofTrace, chain: Chain) -> Result<ProofTrace> {
    trace.steps = chain.steps;
    let failed: Vec<&str> = trace.steps.iter().filter(|s| s.failed()).map(|s| s.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::HardAssertion(format!("exact proof steps failed: {}", failed.join(", "))));
    }
    Ok(trace)
}

/// Runs `f` over independent instances in parallel; results keep input order.
pub fn run_batch<T, F>(instances: &[T], f: F) -> Vec<Result<VerificationReport>>
where
    T: Sync,
    F: Fn(&T) -> Result<VerificationReport> + Sync + Send,
{
    instances.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldCtx {
        FieldCtx::rational()
    }

    fn s(v: &[i64]) -> FSet {
        FSet::from_ints(q(), v.iter().copied())
    }

    #[test]
    fn e4_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let r = verify_e4(&a, &a, &a, VerifyOptions::default()).unwrap();
        assert_eq!(r.lhs, Quantity::int(115u64));
        assert_eq!(r.rhs, Quantity::int(729u64));
        assert!((r.ratio - 115.0 / 729.0).abs() < 1e-12);
        assert!(r.all_flags_hold());
        assert_eq!(r.flags.len(), 3);
    }

    #[test]
    fn e2_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let r = verify_e2(&a, &a, &a, VerifyOptions::default()).unwrap();
        assert_eq!(r.lhs, Quantity::int(19u64));
        assert!((r.rhs.to_f64() - 81.0).abs() < 1e-9);
        assert!((r.ratio - 19.0 / 81.0).abs() < 1e-9);
    }

    #[test]
    fn singletons_are_trivial() {
        let one = s(&[1]);
        let r = verify_e4(&one, &one, &one, VerifyOptions::default()).unwrap();
        assert_eq!((r.lhs.to_f64(), r.rhs.to_f64()), (1.0, 1.0));
        let r = verify_e2(&one, &one, &one, VerifyOptions::default()).unwrap();
        assert_eq!((r.lhs.to_f64(), r.rhs.to_f64()), (1.0, 1.0));
        let r = verify_shift(&one, &one, &one, &one, VerifyOptions::default()).unwrap();
        assert_eq!(r.ratio, 1.0);
        let c = verify_corollary(&one, VerifyOptions::default()).unwrap();
        assert_eq!(c.shift_product.ratio, 1.0);
    }

    #[test]
    fn shift_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let r = verify_shift(&a, &a, &a, &a, VerifyOptions::default()).unwrap();
        let lhs = big(5u64).pow(8) * big(9u64).pow(2) * big(7u64).pow(8);
        assert_eq!(r.lhs, Quantity::Int(lhs));
        assert_eq!(r.rhs, Quantity::Int(big(3u64).pow(22)));
        assert!(r.ratio > 1.0);
        assert!(r.all_flags_hold());
        assert_eq!(r.flags.len(), 4);

        let strict = verify_shift(&a, &a, &a, &a, VerifyOptions { strict: true }).unwrap();
        assert_eq!(strict.lhs, r.lhs, "0 only appears in D(B-1), which strict mode does not touch");
    }

    #[test]
    fn corollary_geometric_triple() {
        let c = verify_corollary(&s(&[1, 2, 4]), VerifyOptions::default()).unwrap();
        assert_eq!(c.shift_product.lhs, Quantity::int(9u64));
        assert!((c.shift_product.rhs.to_f64() - 3.8296).abs() < 1e-3);
        assert!((c.shift_product.ratio - 2.3501).abs() < 1e-3);
        assert_eq!(c.shift_product.sub_reports.len(), 1);
        assert_eq!(c.two_products.sub_reports.len(), 1);
    }

    #[test]
    fn equivalence_classes_small() {
        let a = s(&[1, 2]);
        let b = s(&[1]);
        let t = equiv_classes(&a, &b, &a.ratio(&a).unwrap(), &a.product(&b).unwrap()).unwrap();
        assert_eq!(t.count(), 4);
        assert!(t.classes.iter().all(|c| c.size == 1));
        let e = equiv_energy_inequality(&a, &b, &t).unwrap();
        assert_eq!((e.lhs.clone(), e.rhs.clone()), (big(4u64), big(4u64)));

        let one = s(&[1]);
        let t = equiv_classes(&one, &one, &one, &one).unwrap();
        assert_eq!(t.count(), 1);
    }

    #[test]
    fn equivalence_classes_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let t = equiv_classes(&a, &a, &a.ratio(&a).unwrap(), &a.product(&a).unwrap()).unwrap();
        assert_eq!(t.member_count(), 81);
        let e = equiv_energy_inequality(&a, &a, &t).unwrap();
        assert_eq!(e.rhs, big(115u64));
        assert!(e.lhs <= e.rhs);
    }

    #[test]
    fn trivial_solutions_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let p = s(&[2, 4, 8]);
        let h = rep_function(&a, &a, SetOp::Ratio).unwrap();
        let qb = richest_bucket(&h, Moment::FOUR_THIRDS).unwrap();
        let sol = trivial_solution_count(&a, &a, &qb, &p).unwrap();
        assert!(sol.premise && sol.holds);
        // oracle: triple loop
        let mut n = 0;
        for x in [1i64, 2, 4] {
            for y in [1i64, 2, 4] {
                if !qb.members.contains(&q().frac(x, y).unwrap()) {
                    continue;
                }
                let c = [1i64, 2, 4].iter().filter(|b| [2, 4, 8].contains(&(x * *b)) && [2, 4, 8].contains(&(y * *b))).count();
                n += c * c;
            }
        }
        assert_eq!(sol.n, n as u64);
    }

    #[test]
    fn trace_geometric_triple() {
        let a = s(&[1, 2, 4]);
        let opts = TraceOptions { force: true, ..Default::default() };
        let t = proof_trace_shift(&a, &a, &a, &a, opts).unwrap();
        assert!(!t.degenerate);
        for name in ["pair_partition", "n_lower_bound", "equiv_energy", "cauchy_schwarz_classes"] {
            assert_eq!(t.step(name).unwrap().holds, Some(true), "{name}");
        }
        assert!(t.exact_steps().all(|s| s.holds == Some(true)));
        assert!(t.steps.iter().filter(|s| s.kind == StepKind::Asymptotic).all(|s| s.holds.is_none()));
        let report = t.into_report();
        assert_eq!(report.step_count(), 1 + report.trace.as_ref().unwrap().len());
    }

    #[test]
    fn trace_singletons_degenerate() {
        let one = s(&[1]);
        let opts = TraceOptions { force: true, ..Default::default() };
        let t = proof_trace_shift(&one, &one, &one, &one, opts).unwrap();
        assert!(t.degenerate);
        assert!(t.exact_steps().all(|s| s.holds == Some(true)));
    }

    #[test]
    fn trace_requires_force_for_small_sets() {
        let a = s(&[1, 2, 4]);
        assert!(matches!(
            proof_trace_shift(&a, &a, &a, &a, TraceOptions::default()),
            Err(Error::SetTooSmall(_))
        ));
    }

    #[test]
    fn csv_rows_match_step_count() {
        let c = verify_corollary(&s(&[1, 2, 4]), VerifyOptions::default()).unwrap();
        let rows = c.shift_product.csv_rows(0);
        assert_eq!(rows.len(), c.shift_product.step_count());
        assert!(rows.iter().all(|r| r.len() == CSV_HEADER.len()));
    }

    #[test]
    fn batch_preserves_order() {
        let sets: Vec<FSet> = (1..6).map(|n| s(&(1..=n).collect::<Vec<_>>())).collect();
        let out = run_batch(&sets, |a| verify_e2(a, a, a, VerifyOptions::default()));
        for (a, r) in sets.iter().zip(out) {
            assert_eq!(r.unwrap().inputs["A"], a.to_string());
        }
    }
}
