//! Finite-set algebra: sumsets, product sets, ratio sets, shifts and
//! shifted products.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{Element, FieldCtx};

/// Sets with more pairs than this are combined in parallel.
const PAR_PAIRS: usize = 1 << 16;

/// A finite set of field elements, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FSet {
    ctx: FieldCtx,
    elems: Vec<Element>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOp {
    Sum,
    Difference,
    Product,
    Ratio,
}

impl SetOp {
    pub fn apply(self, ctx: &FieldCtx, x: &Element, y: &Element) -> Result<Element> {
        match self {
            SetOp::Sum => Ok(ctx.add(x, y)),
            SetOp::Difference => Ok(ctx.sub(x, y)),
            SetOp::Product => Ok(ctx.mul(x, y)),
            SetOp::Ratio => ctx.div(x, y),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SetOp::Sum => "+",
            SetOp::Difference => "-",
            SetOp::Product => "*",
            SetOp::Ratio => "/",
        }
    }
}

impl std::str::FromStr for SetOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" | "+" => Ok(SetOp::Sum),
            "difference" | "diff" | "-" => Ok(SetOp::Difference),
            "product" | "*" => Ok(SetOp::Product),
            "ratio" | "/" => Ok(SetOp::Ratio),
            other => Err(Error::Parse(format!("unknown set operation {other:?}"))),
        }
    }
}

impl FSet {
    pub fn new<I: IntoIterator<Item = Element>>(ctx: FieldCtx, elems: I) -> Result<Self> {
        let elems: Vec<Element> = elems.into_iter().collect();
        if elems.iter().any(|e| !ctx.contains(e)) {
            return Err(Error::CtxMismatch);
        }
        Ok(Self::from_unsorted(ctx, elems))
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(ctx: FieldCtx, values: I) -> Self {
        Self::from_unsorted(ctx, values.into_iter().map(|v| ctx.int(v)).collect())
    }

    pub fn empty(ctx: FieldCtx) -> Self {
        FSet { ctx, elems: Vec::new() }
    }

    pub(crate) fn from_unsorted(ctx: FieldCtx, mut elems: Vec<Element>) -> Self {
        elems.par_sort_unstable();
        elems.dedup();
        FSet { ctx, elems }
    }

    /// Caller guarantees `elems` is strictly increasing and valid in `ctx`.
    pub(crate) fn from_sorted(ctx: FieldCtx, elems: Vec<Element>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FSet { ctx, elems }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[Element] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elems.iter()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elems.binary_search(e).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&self.ctx.zero())
    }

    pub fn without_zero(&self) -> FSet {
        let zero = self.ctx.zero();
        FSet {
            ctx: self.ctx,
            elems: self.elems.iter().filter(|e| **e != zero).cloned().collect(),
        }
    }

    pub fn with(&self, e: Element) -> Result<FSet> {
        let mut elems = self.elems.clone();
        elems.push(e);
        FSet::new(self.ctx, elems)
    }

    pub fn is_subset(&self, other: &FSet) -> bool {
        self.elems.iter().all(|e| other.contains(e))
    }

    pub(crate) fn same_ctx(&self, other: &FSet) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::CtxMismatch)
        }
    }

    /// `{x ∘ y : x ∈ self, y ∈ other}`.
    pub fn combine(&self, other: &FSet, op: SetOp) -> Result<FSet> {
        self.same_ctx(other)?;
        if op == SetOp::Ratio && other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = self.ctx;
        let row = |x: &Element| -> Vec<Element> {
            other
                .elems
                .iter()
                .map(|y| op.apply(&ctx, x, y).expect("divisor checked nonzero"))
                .collect()
        };
        let out: Vec<Element> = if self.len() * other.len() >= PAR_PAIRS {
            self.elems.par_iter().flat_map_iter(row).collect()
        } else {
            self.elems.iter().flat_map(row).collect()
        };
        Ok(FSet::from_unsorted(ctx, out))
    }

    pub fn sumset(&self, other: &FSet) -> Result<FSet> {
        self.combine(other, SetOp::Sum)
    }

    pub fn product(&self, other: &FSet) -> Result<FSet> {
        self.combine(other, SetOp::Product)
    }

    pub fn ratio(&self, other: &FSet) -> Result<FSet> {
        self.combine(other, SetOp::Ratio)
    }

    /// `X + λ`.
    pub fn shift(&self, lambda: &Element) -> FSet {
        let ctx = self.ctx;
        FSet::from_unsorted(ctx, self.elems.iter().map(|x| ctx.add(x, lambda)).collect())
    }

    /// `λX`.
    pub fn dilate(&self, lambda: &Element) -> FSet {
        let ctx = self.ctx;
        FSet::from_unsorted(ctx, self.elems.iter().map(|x| ctx.mul(x, lambda)).collect())
    }

    /// `-X`.
    pub fn negate(&self) -> FSet {
        let ctx = self.ctx;
        FSet::from_unsorted(ctx, self.elems.iter().map(|x| ctx.neg(x)).collect())
    }

    /// `C(A + λ)` with `self` playing `C`.
    pub fn shifted_product(&self, a: &FSet, lambda: &Element) -> Result<FSet> {
        self.product(&a.shift(lambda))
    }

    /// Cardinality of `self(a + 1)` against `self(λa + λ)`; equal for every `λ ≠ 0`.
    pub fn dilate_invariance_check(&self, a: &FSet, lambda: &Element) -> Result<bool> {
        if lambda.is_zero() {
            return Err(Error::ZeroDilation);
        }
        let one = self.ctx.one();
        let plain = self.shifted_product(a, &one)?;
        let dilated = self.product(&a.dilate(lambda).shift(lambda))?;
        Ok(plain.len() == dilated.len())
    }
}

impl fmt::Display for FSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for FSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elems.iter())
    }
}

impl<'a> IntoIterator for &'a FSet {
    type Item = &'a Element;
    type IntoIter = std::slice::Iter<'a, Element>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldCtx {
        FieldCtx::rational()
    }

    fn f(p: u64) -> FieldCtx {
        FieldCtx::prime(p).unwrap()
    }

    fn set(ctx: FieldCtx, xs: &[&str]) -> FSet {
        FSet::new(ctx, xs.iter().map(|s| ctx.parse(s).unwrap())).unwrap()
    }

    #[test]
    fn sumset_of_zero() {
        let a = FSet::from_ints(q(), [0]);
        assert_eq!(a.sumset(&a).unwrap(), a);
    }

    #[test]
    fn geometric_triple_closed_mod_7() {
        let a = FSet::from_ints(f(7), [1, 2, 4]);
        assert_eq!(a.product(&a).unwrap(), a);
    }

    #[test]
    fn ratio_set_of_geometric_triple() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        let r = a.ratio(&a).unwrap();
        assert_eq!(r, set(q(), &["1", "2", "1/2", "4", "1/4"]));
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn ratio_rejects_zero_divisor() {
        let a = FSet::from_ints(q(), [0, 1]);
        assert_eq!(a.ratio(&a), Err(Error::DivisionByZero));
    }

    #[test]
    fn combine_rejects_mixed_contexts() {
        let a = FSet::from_ints(q(), [1]);
        let b = FSet::from_ints(f(7), [1]);
        assert_eq!(a.product(&b), Err(Error::CtxMismatch));
    }

    #[test]
    fn shifts() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        assert_eq!(a.shift(&q().int(1)), FSet::from_ints(q(), [2, 3, 5]));
        assert_eq!(a.shift(&q().int(-1)), FSet::from_ints(q(), [0, 1, 3]));
        let b = FSet::from_ints(f(7), [1, 2, 4]);
        assert_eq!(b.shift(&f(7).int(3)), FSet::from_ints(f(7), [4, 5, 0]));
    }

    #[test]
    fn shifted_products() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        let one = q().int(1);
        let cap = a.shifted_product(&a, &one).unwrap();
        assert_eq!(cap, FSet::from_ints(q(), [2, 3, 5, 4, 6, 10, 8, 12, 20]));
        assert_eq!(cap.len(), 9);

        let b = FSet::from_ints(f(7), [1, 2, 4]);
        let cap7 = b.shifted_product(&b, &f(7).int(1)).unwrap();
        assert_eq!(cap7, FSet::from_ints(f(7), [1, 2, 3, 4, 5, 6]));

        let c = FSet::from_ints(q(), [1]);
        let z = FSet::from_ints(q(), [0]);
        assert_eq!(c.shifted_product(&z, &one).unwrap(), c);
    }

    #[test]
    fn dilation_invariance_examples() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        assert!(a.dilate_invariance_check(&a, &q().int(2)).unwrap());
        let one = FSet::from_ints(q(), [1]);
        assert!(one.dilate_invariance_check(&one, &q().int(-1)).unwrap());
        assert_eq!(
            a.dilate_invariance_check(&a, &q().int(0)),
            Err(Error::ZeroDilation)
        );
    }

    #[test]
    fn dilation_invariance_exhaustive_f13() {
        let ctx = f(13);
        let universe: Vec<i64> = (0..13).collect();
        let subsets: Vec<FSet> = (1..=4)
            .flat_map(|k| itertools::Itertools::combinations(universe.iter().copied(), k))
            .map(|c| FSet::from_ints(ctx, c))
            .collect();
        // every C against a sample of A keeps this fast; all λ
        for (i, c) in subsets.iter().enumerate().step_by(7) {
            for a in subsets.iter().skip(i % 5).step_by(11) {
                for l in 1..13 {
                    assert!(c.dilate_invariance_check(a, &ctx.int(l)).unwrap());
                }
            }
        }
    }
}
