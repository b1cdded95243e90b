//! Cartesian point grids, the shifted line families `y = (1/d)(x/c - 1)`,
//! exact incidence counting and the Stevens-de Zeeuw bound expression.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{rep_function, DyadicBucket};
use crate::error::{Error, Result};
use crate::field::{Element, FieldCtx};
use crate::setops::{FSet, SetOp};

/// A line `a·x + b·y + c = 0` with `b ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Line {
    pub a: Element,
    pub b: Element,
    pub c: Element,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `l_{d,c}` for `d ∈ D`, `c ∈ C`.
    ShiftLines,
    /// `l_{t,c}` for `t ∈ S`, `c ∈ C`.
    SwappedLines,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineFamily {
    pub kind: FamilyKind,
    /// `(d or t, c)` for the shifted families, `(slope, intercept)` for explicit ones.
    pub params: Vec<(Element, Element)>,
    pub lines: Vec<Line>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointGrid {
    pub xs: FSet,
    pub ys: FSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    BruteForce,
    Hashed,
}

impl std::str::FromStr for CountMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bruteforce" | "brute" | "brute-force" => Ok(CountMethod::BruteForce),
            "hashed" | "hash" => Ok(CountMethod::Hashed),
            other => Err(Error::Parse(format!("unknown counting method {other:?}"))),
        }
    }
}

impl PointGrid {
    pub fn new(xs: FSet, ys: FSet) -> Result<Self> {
        xs.same_ctx(&ys)?;
        Ok(PointGrid { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LineFamily {
    fn parametric(kind: FamilyKind, scales: &FSet, c_set: &FSet) -> Result<Self> {
        scales.same_ctx(c_set)?;
        if scales.contains_zero() || c_set.contains_zero() {
            return Err(Error::ZeroParameter);
        }
        let ctx = scales.ctx();
        let mut params = Vec::with_capacity(scales.len() * c_set.len());
        let mut lines = Vec::with_capacity(params.capacity());
        for d in scales {
            for c in c_set {
                // y = (1/d)(x/c - 1)  ⇔  x - c - d·c·y = 0
                lines.push(Line {
                    a: ctx.one(),
                    b: ctx.neg(&ctx.mul(d, c)),
                    c: ctx.neg(c),
                });
                params.push((d.clone(), c.clone()));
            }
        }
        Ok(LineFamily { kind, params, lines })
    }

    /// `{l_{d,c} : d ∈ D, c ∈ C}` with `l_{d,c}: y = (1/d)(x/c - 1)`.
    pub fn shift_lines(d: &FSet, c: &FSet) -> Result<Self> {
        Self::parametric(FamilyKind::ShiftLines, d, c)
    }

    /// `{l_{t,c} : t ∈ S, c ∈ C}`, the family with the roles of `D` and `S` exchanged.
    pub fn swapped_lines(s: &FSet, c: &FSet) -> Result<Self> {
        Self::parametric(FamilyKind::SwappedLines, s, c)
    }

    /// Lines `y = m·x + k` from `(m, k)` pairs; duplicates are dropped.
    pub fn explicit(ctx: FieldCtx, slope_intercepts: &[(Element, Element)]) -> Self {
        let mut seen = HashSet::new();
        let mut params = Vec::new();
        let mut lines = Vec::new();
        for (m, k) in slope_intercepts {
            if seen.insert((m.clone(), k.clone())) {
                lines.push(Line {
                    a: m.clone(),
                    b: ctx.neg(&ctx.one()),
                    c: k.clone(),
                });
                params.push((m.clone(), k.clone()));
            }
        }
        LineFamily { kind: FamilyKind::Explicit, params, lines }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

impl Line {
    fn contains(&self, ctx: &FieldCtx, x: &Element, y: &Element) -> bool {
        let lhs = ctx.add(&ctx.add(&ctx.mul(&self.a, x), &ctx.mul(&self.b, y)), &self.c);
        lhs.is_zero()
    }

    /// `(slope, intercept)` of `y = slope·x + intercept`.
    fn slope_intercept(&self, ctx: &FieldCtx) -> (Element, Element) {
        let minus_inv_b = ctx.neg(&ctx.inv(&self.b).expect("non-vertical line"));
        (ctx.mul(&self.a, &minus_inv_b), ctx.mul(&self.c, &minus_inv_b))
    }
}

/// Number of `(point, line)` pairs with the point on the line.
///
/// `BruteForce` tests every triple against the implicit equation;
/// `Hashed` evaluates each line in slope-intercept form at every `x` and
/// looks the result up in `Y`.
pub fn count_incidences(grid: &PointGrid, lines: &LineFamily, method: CountMethod) -> u64 {
    let ctx = grid.xs.ctx();
    match method {
        CountMethod::BruteForce => lines
            .lines
            .par_iter()
            .map(|l| {
                let mut n = 0u64;
                for x in &grid.xs {
                    for y in &grid.ys {
                        if l.contains(&ctx, x, y) {
                            n += 1;
                        }
                    }
                }
                n
            })
            .sum(),
        CountMethod::Hashed => {
            let ys: HashSet<&Element> = grid.ys.iter().collect();
            lines
                .lines
                .par_iter()
                .map(|l| {
                    let (m, k) = l.slope_intercept(&ctx);
                    grid.xs
                        .iter()
                        .filter(|x| ys.contains(&ctx.add(&ctx.mul(&m, x), &k)))
                        .count() as u64
                })
                .sum()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdzBound {
    pub value: f64,
    /// `(larger, smaller)` side lengths after orienting `|A| ≥ |B|`.
    pub oriented: (u64, u64),
    pub lines: u64,
    pub flags: BTreeMap<String, bool>,
}

pub const FLAG_LINES_VS_P: &str = "lines_times_small_le_p2";
pub const FLAG_LINES_CUBED: &str = "small_times_large_sq_le_lines_cubed";

/// `|A|^{1/2}|B|^{3/4}|L|^{3/4} + |L|` with `|A| ≥ |B|`, and the two
/// preconditions `|L||B| ≤ p²` and `|B||A|² ≤ |L|³` (hidden constant 1).
pub fn sdz_bound(a_len: u64, b_len: u64, lines: u64, p: Option<u64>) -> SdzBound {
    let (big, small) = if a_len >= b_len { (a_len, b_len) } else { (b_len, a_len) };
    let value = (big as f64).sqrt() * (small as f64).powf(0.75) * (lines as f64).powf(0.75)
        + lines as f64;
    let lines_vs_p = match p {
        None => true,
        Some(p) => (lines as u128) * (small as u128) <= (p as u128) * (p as u128),
    };
    let cubed = (small as u128) * (big as u128) * (big as u128) <= (lines as u128).pow(3);
    let flags = BTreeMap::from([
        (FLAG_LINES_VS_P.to_string(), lines_vs_p),
        (FLAG_LINES_CUBED.to_string(), cubed),
    ]);
    SdzBound { value, oriented: (big, small), lines, flags }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionCheck {
    pub incidences: u64,
    /// `|S_τ|·τ·|C|`
    pub required: u64,
    pub holds: bool,
    pub grid_size: (usize, usize),
    pub lines: usize,
    pub bound: SdzBound,
}

fn construction_inputs(a: &FSet, d: &FSet, c: &FSet) -> Result<FSet> {
    a.same_ctx(d)?;
    a.same_ctx(c)?;
    for (name, s) in [("A", a), ("C", c), ("D", d)] {
        if s.contains_zero() {
            return Err(Error::ZeroElement(name.into()));
        }
    }
    c.shifted_product(a, &a.ctx().one())
}

fn finish(grid: PointGrid, lines: LineFamily, required: u64, p: Option<u64>) -> ConstructionCheck {
    let incidences = count_incidences(&grid, &lines, CountMethod::Hashed);
    let bound = sdz_bound(grid.xs.len() as u64, grid.ys.len() as u64, lines.len() as u64, p);
    ConstructionCheck {
        incidences,
        required,
        holds: incidences >= required,
        grid_size: (grid.xs.len(), grid.ys.len()),
        lines: lines.len(),
        bound,
    }
}

/// Incidences between `C(A+1) × S_τ` and `{l_{d,c}}`; at least `|S_τ|·τ·|C|`.
pub fn construction_identity_check(
    a: &FSet,
    d: &FSet,
    c: &FSet,
    bucket: &DyadicBucket,
) -> Result<ConstructionCheck> {
    let cap = construction_inputs(a, d, c)?;
    let grid = PointGrid::new(cap, bucket.members.clone())?;
    let lines = LineFamily::shift_lines(d, c)?;
    let required = bucket.members.len() as u64 * bucket.tau * c.len() as u64;
    Ok(finish(grid, lines, required, a.ctx().modulus()))
}

/// Incidences between `C(A+1) × D` and `{l_{t,c} : t ∈ S_τ}`; at least `|S_τ|·τ·|C|`.
pub fn swapped_construction_check(
    a: &FSet,
    d: &FSet,
    c: &FSet,
    bucket: &DyadicBucket,
) -> Result<ConstructionCheck> {
    let cap = construction_inputs(a, d, c)?;
    let grid = PointGrid::new(cap, d.clone())?;
    let lines = LineFamily::swapped_lines(&bucket.members, c)?;
    let required = bucket.members.len() as u64 * bucket.tau * c.len() as u64;
    Ok(finish(grid, lines, required, a.ctx().modulus()))
}

/// Runs both construction checks for every dyadic bucket of `r_{A/D}`.
pub fn all_bucket_checks(
    a: &FSet,
    d: &FSet,
    c: &FSet,
) -> Result<Vec<(DyadicBucket, ConstructionCheck, ConstructionCheck)>> {
    let h = rep_function(a, d, SetOp::Ratio)?;
    crate::energy::dyadic_buckets(&h)
        .into_iter()
        .map(|b| {
            let direct = construction_identity_check(a, d, c, &b)?;
            let swapped = swapped_construction_check(a, d, c, &b)?;
            Ok((b, direct, swapped))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{richest_bucket, Moment};

    fn q() -> FieldCtx {
        FieldCtx::rational()
    }

    #[test]
    fn two_point_example() {
        let grid = PointGrid::new(FSet::from_ints(q(), [3]), FSet::from_ints(q(), [1, 2])).unwrap();
        let lines =
            LineFamily::shift_lines(&FSet::from_ints(q(), [1, 2]), &FSet::from_ints(q(), [1]))
                .unwrap();
        assert_eq!(count_incidences(&grid, &lines, CountMethod::BruteForce), 2);
        assert_eq!(count_incidences(&grid, &lines, CountMethod::Hashed), 2);
    }

    #[test]
    fn empty_and_single() {
        let one = FSet::from_ints(q(), [1]);
        let lines = LineFamily::shift_lines(&one, &one).unwrap();
        let empty = PointGrid::new(FSet::empty(q()), one.clone()).unwrap();
        assert_eq!(count_incidences(&empty, &lines, CountMethod::Hashed), 0);
        let grid = PointGrid::new(FSet::from_ints(q(), [2]), one.clone()).unwrap();
        assert_eq!(count_incidences(&grid, &lines, CountMethod::BruteForce), 1);
    }

    #[test]
    fn zero_parameters_rejected() {
        let z = FSet::from_ints(q(), [0, 1]);
        let one = FSet::from_ints(q(), [1]);
        assert_eq!(LineFamily::shift_lines(&z, &one), Err(Error::ZeroParameter));
        assert_eq!(LineFamily::swapped_lines(&one, &z), Err(Error::ZeroParameter));
    }

    #[test]
    fn explicit_lines_dedup() {
        let ctx = q();
        let fam = LineFamily::explicit(
            ctx,
            &[(ctx.int(1), ctx.int(0)), (ctx.int(1), ctx.int(0)), (ctx.int(2), ctx.int(1))],
        );
        assert_eq!(fam.len(), 2);
        let grid = PointGrid::new(FSet::from_ints(ctx, [0, 1]), FSet::from_ints(ctx, [0, 1, 3]))
            .unwrap();
        // y = x hits (0,0),(1,1); y = 2x+1 hits (0,1),(1,3)
        assert_eq!(count_incidences(&grid, &fam, CountMethod::Hashed), 4);
        assert_eq!(count_incidences(&grid, &fam, CountMethod::BruteForce), 4);
    }

    #[test]
    fn sdz_examples() {
        let b = sdz_bound(1, 1, 1, None);
        assert_eq!(b.value, 2.0);
        assert!(b.flags.values().all(|f| *f));

        let b = sdz_bound(9, 3, 9, None);
        let want = 3.0 * 3f64.powf(0.75) * 9f64.powf(0.75) + 9.0;
        assert!((b.value - want).abs() < 1e-12);
        assert!((b.value - 44.534).abs() < 1e-3);
        assert!(b.flags[FLAG_LINES_CUBED]);

        // orientation: swapping the sides gives the same value
        assert_eq!(sdz_bound(3, 9, 9, None).value, b.value);

        let b = sdz_bound(4, 4, 100, Some(101));
        // 400 ≤ 10201
        assert!(b.flags[FLAG_LINES_VS_P]);
        let b = sdz_bound(4, 4, 10_000, Some(101));
        assert!(!b.flags[FLAG_LINES_VS_P]);
    }

    #[test]
    fn construction_on_geometric_triple() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        let h = rep_function(&a, &a, SetOp::Ratio).unwrap();
        let bucket = richest_bucket(&h, Moment::int(4)).unwrap();
        assert_eq!((bucket.tau, bucket.len()), (2, 3));
        let chk = construction_identity_check(&a, &a, &a, &bucket).unwrap();
        assert_eq!(chk.required, 18);
        assert!(chk.holds, "{chk:?}");
        let sw = swapped_construction_check(&a, &a, &a, &bucket).unwrap();
        assert!(sw.holds, "{sw:?}");
    }

    #[test]
    fn construction_singleton() {
        let one = FSet::from_ints(q(), [1]);
        let h = rep_function(&one, &one, SetOp::Ratio).unwrap();
        let bucket = richest_bucket(&h, Moment::int(4)).unwrap();
        let chk = construction_identity_check(&one, &one, &one, &bucket).unwrap();
        assert!(chk.incidences >= 1 && chk.holds);
        assert!(swapped_construction_check(&one, &one, &one, &bucket).unwrap().holds);
    }

    #[test]
    fn construction_subgroup_mod_101() {
        let f = FieldCtx::prime(101).unwrap();
        let g = f.pow(&f.int(2), 10);
        let h = FSet::new(f, (0..10).map(|i| f.pow(&g, i))).unwrap();
        assert_eq!(h.len(), 10);
        for (_, direct, swapped) in all_bucket_checks(&h, &h, &h).unwrap() {
            assert!(direct.holds && swapped.holds);
        }
    }

    #[test]
    fn construction_rejects_zero() {
        let a = FSet::from_ints(q(), [0, 1]);
        let one = FSet::from_ints(q(), [1]);
        let h = rep_function(&one, &one, SetOp::Ratio).unwrap();
        let bucket = richest_bucket(&h, Moment::int(4)).unwrap();
        assert!(matches!(
            construction_identity_check(&a, &one, &one, &bucket),
            Err(Error::ZeroElement(_))
        ));
    }
}
