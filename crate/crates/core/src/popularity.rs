//! Popular products and the popular subset of `A`, plus the iterative
//! refinement that finds a subset whose popular part keeps a constant
//! fraction of its 4/3-energy.

use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::Serialize;

use crate::energy::{rep_function, Moment};
use crate::error::{Error, Result};
use crate::field::Element;
use crate::numeric::{self, cmp_ln_rational, ENERGY_REL_TOL};
use crate::setops::{FSet, SetOp};

/// Smallest `|A|` for which `1 - 3/ln|A| > 0`, so `A'` is guaranteed nonempty.
pub const GUARANTEE_MIN_SIZE: usize = 21;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopularityDecomposition {
    /// `P = {x ∈ AB : r_AB(x) ≥ |A||B| / (ln L · |AB|)}`
    pub popular: FSet,
    /// `A' = {a ∈ A : |{b : ab ∈ P}| ≥ (2/3)|B|}`
    pub popular_subset: FSet,
    pub threshold_p: f64,
    pub threshold_a: f64,
    /// `|{(a, b) : ab ∈ P}|`
    pub covered_pairs: u64,
    pub total_pairs: u64,
    pub product_set_size: usize,
    /// `L`, the size whose logarithm enters the threshold (normally `|A|`).
    pub log_size: usize,
    /// `|{b : ab ∈ P}|` for each `a ∈ A`.
    pub rows: Vec<(Element, u64)>,
}

impl PopularityDecomposition {
    pub fn uncovered_pairs(&self) -> u64 {
        self.total_pairs - self.covered_pairs
    }

    /// `covered_pairs ≥ (1 - 1/ln L)|A||B|`.
    pub fn coverage_bound_holds(&self) -> bool {
        let ln = (self.log_size as f64).ln();
        self.covered_pairs as f64 >= (1.0 - 1.0 / ln) * self.total_pairs as f64
    }

    /// `uncovered < |A||B| / ln L`, strict.
    pub fn uncovered_bound_holds(&self) -> bool {
        let ln = (self.log_size as f64).ln();
        (self.uncovered_pairs() as f64) < self.total_pairs as f64 / ln || self.total_pairs == 0
    }

    /// `|A'| ≥ (1 - 3/ln L)|A|`.
    pub fn subset_bound_holds(&self) -> bool {
        let ln = (self.log_size as f64).ln();
        self.popular_subset.len() as f64 >= (1.0 - 3.0 / ln) * self.rows.len() as f64
    }
}

/// Popular decomposition of `A` with respect to `B`, thresholds using `ln|A|`.
pub fn popular_decompose(a: &FSet, b: &FSet) -> Result<PopularityDecomposition> {
    decompose_with(a, b, a.len(), false)
}

/// As [`popular_decompose`] with an explicit logarithm size `L`; `force`
/// skips the `|A| ≥ 3` requirement.
pub fn decompose_with(
    a: &FSet,
    b: &FSet,
    log_size: usize,
    force: bool,
) -> Result<PopularityDecomposition> {
    a.same_ctx(b)?;
    if !force && a.len() < 3 {
        return Err(Error::SetTooSmall(format!("|A| = {} < 3", a.len())));
    }
    if a.contains_zero() {
        return Err(Error::ZeroElement("A".into()));
    }
    if b.contains_zero() {
        return Err(Error::ZeroElement("B".into()));
    }
    let hist = rep_function(a, b, SetOp::Product)?;
    let total = (a.len() * b.len()) as u64;
    let ab = hist.len() as u64;
    let num = BigUint::from(total);
    // r ≥ |A||B| / (ln L · |AB|)  ⇔  ln L ≥ |A||B| / (r · |AB|)
    let popular_elems: Vec<Element> = hist
        .counts()
        .iter()
        .filter(|(_, r)| {
            log_size >= 1 && cmp_ln_rational(log_size as u64, &num, &BigUint::from(r * ab)) != Ordering::Less
        })
        .map(|(x, _)| x.clone())
        .collect();
    let popular = FSet::from_sorted(a.ctx(), popular_elems);

    let ctx = a.ctx();
    let rows: Vec<(Element, u64)> = a
        .iter()
        .map(|x| {
            let hits = b.iter().filter(|y| popular.contains(&ctx.mul(x, y))).count();
            (x.clone(), hits as u64)
        })
        .collect();
    let covered_pairs = rows.iter().map(|(_, h)| *h).sum();
    let need = 2 * b.len() as u64;
    let popular_subset = FSet::from_sorted(
        ctx,
        rows.iter().filter(|(_, h)| 3 * h >= need).map(|(x, _)| x.clone()).collect(),
    );
    let ln = (log_size.max(1) as f64).ln();
    Ok(PopularityDecomposition {
        popular,
        popular_subset,
        threshold_p: total as f64 / (ln * ab as f64),
        threshold_a: 2.0 * b.len() as f64 / 3.0,
        covered_pairs,
        total_pairs: total,
        product_set_size: ab as usize,
        log_size,
        rows,
    })
}

fn membership_rows(a_prime: &FSet, b: &FSet, p: &FSet) -> Vec<Vec<u64>> {
    let ctx = b.ctx();
    let words = b.len().div_ceil(64);
    a_prime
        .iter()
        .map(|x| {
            let mut bits = vec![0u64; words];
            for (j, y) in b.iter().enumerate() {
                if p.contains(&ctx.mul(x, y)) {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect()
}

/// `min_{a, a' ∈ A'} |{b ∈ B : ab ∈ P, a'b ∈ P}|`, or `None` when `A'` is empty.
pub fn intersection_bound_check(a_prime: &FSet, b: &FSet, p: &FSet) -> Option<u64> {
    let rows = membership_rows(a_prime, b, p);
    let mut best: Option<u64> = None;
    for (i, r) in rows.iter().enumerate() {
        for s in &rows[i..] {
            let common: u64 = r.iter().zip(s).map(|(x, y)| (x & y).count_ones() as u64).sum();
            best = Some(best.map_or(common, |m| m.min(common)));
        }
    }
    best
}

/// The guaranteed floor `2⌈2|B|/3⌉ - |B|` on pairwise intersections inside `A'`.
pub fn intersection_floor(b_len: usize) -> u64 {
    let two_thirds = (2 * b_len).div_ceil(3);
    (2 * two_thirds).saturating_sub(b_len) as u64
}

/// `E*_{4/3}(X) = Σ_x r_{X/X}(x)^{4/3}`.
pub fn energy_43(x: &FSet) -> Result<f64> {
    Ok(rep_function(x, x, SetOp::Ratio)?.energy_real(Moment::FOUR_THIRDS))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefineStep {
    pub size: usize,
    /// `E*_{4/3}(A_i)`
    pub energy: f64,
    pub popular_size: usize,
    /// `E*_{4/3}(A_i')`
    pub popular_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub subset: FSet,
    pub iterations: usize,
    pub max_iterations: usize,
    pub trace: Vec<RefineStep>,
    /// The stopping rule `E*_{4/3}(A_i') ≥ E*_{4/3}(A_i)/4` fired.
    pub converged: bool,
    /// `|A| ≥ 21`; below this the size guarantees are vacuous.
    pub guarantee_regime: bool,
    pub original_size: usize,
}

impl Refinement {
    /// `|A_1| ≥ |A|/e³`.
    pub fn size_bound_holds(&self) -> bool {
        self.subset.len() as f64 >= self.original_size as f64 / 3f64.exp()
    }

    /// `|A_i| ≥ (1 - 3/ln|A|)^i |A|` along the chain.
    pub fn chain_bound_holds(&self) -> bool {
        let factor = 1.0 - 3.0 / (self.original_size as f64).ln();
        self.trace
            .iter()
            .enumerate()
            .all(|(i, s)| s.size as f64 >= factor.powi(i as i32) * self.original_size as f64)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.trace.iter().map(|s| s.energy).collect()
    }
}

/// Iterates `A_{i+1} = A_i'` (popularity relative to `B`, thresholds using
/// `ln|A|` of the starting set) until `E*_{4/3}(A_i') ≥ E*_{4/3}(A_i)/4`,
/// for at most `⌈ln|A|⌉` iterations.
pub fn refine_43(a: &FSet, b: &FSet, force: bool) -> Result<Refinement> {
    let guarantee_regime = a.len() >= GUARANTEE_MIN_SIZE;
    if !guarantee_regime && !force {
        return Err(Error::SetTooSmall(format!(
            "|A| = {} < {GUARANTEE_MIN_SIZE}; pass force to run without guarantees",
            a.len()
        )));
    }
    let log_size = a.len();
    let max_iterations = (log_size.max(1) as f64).ln().ceil() as usize;
    let mut current = a.clone();
    let mut trace = Vec::new();
    for i in 0..=max_iterations {
        let dec = decompose_with(&current, b, log_size, true)?;
        let energy = energy_43(&current)?;
        let popular_energy = energy_43(&dec.popular_subset)?;
        trace.push(RefineStep {
            size: current.len(),
            energy,
            popular_size: dec.popular_subset.len(),
            popular_energy,
        });
        if numeric::ge_rel(popular_energy, energy / 4.0, ENERGY_REL_TOL) {
            return Ok(Refinement {
                subset: current,
                iterations: i,
                max_iterations,
                trace,
                converged: true,
                guarantee_regime,
                original_size: a.len(),
            });
        }
        if i < max_iterations {
            current = dec.popular_subset;
        }
    }
    Ok(Refinement {
        subset: current,
        iterations: max_iterations,
        max_iterations,
        trace,
        converged: false,
        guarantee_regime,
        original_size: a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn q() -> FieldCtx {
        FieldCtx::rational()
    }

    #[test]
    fn geometric_triple_decomposition() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        let d = popular_decompose(&a, &a).unwrap();
        assert!((d.threshold_p - 9.0 / (3f64.ln() * 5.0)).abs() < 1e-12);
        assert!((d.threshold_p - 1.638).abs() < 1e-3);
        assert_eq!(d.popular, FSet::from_ints(q(), [2, 4, 8]));
        assert_eq!(d.popular_subset, a);
        let rows: Vec<u64> = d.rows.iter().map(|(_, h)| *h).collect();
        assert_eq!(rows, vec![2, 3, 2]);
        assert_eq!(d.covered_pairs, 7);
        assert!(d.coverage_bound_holds());
        assert!(d.uncovered_bound_holds());
    }

    #[test]
    fn too_small_and_zero() {
        let one = FSet::from_ints(q(), [1]);
        assert!(matches!(popular_decompose(&one, &one), Err(Error::SetTooSmall(_))));
        let z = FSet::from_ints(q(), [0, 1, 2]);
        assert!(matches!(popular_decompose(&z, &z), Err(Error::ZeroElement(_))));
    }

    #[test]
    fn subgroup_of_order_25_mod_101() {
        let f = FieldCtx::prime(101).unwrap();
        // 2 is a primitive root mod 101; 2^4 generates the subgroup of order 25
        let g = f.pow(&f.int(2), 4);
        let h = FSet::new(f, (0..25).map(|i| f.pow(&g, i))).unwrap();
        assert_eq!(h.len(), 25);
        let d = popular_decompose(&h, &h).unwrap();
        // AB = H, every product has 25 representations, all popular
        assert_eq!(d.covered_pairs, 625);
        assert!(d.covered_pairs as f64 >= (1.0 - 1.0 / 25f64.ln()) * 625.0);
        assert_eq!(d.popular_subset, h);
    }

    #[test]
    fn intersections_of_geometric_triple() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        let p = FSet::from_ints(q(), [2, 4, 8]);
        // rows {2,4} and {1,2} share only 2
        assert_eq!(intersection_bound_check(&a, &a, &p), Some(1));
        assert!(1 >= intersection_floor(3));
        let single = FSet::from_ints(q(), [2]);
        assert_eq!(intersection_bound_check(&single, &a, &p), Some(3));
        assert_eq!(intersection_bound_check(&FSet::empty(q()), &a, &p), None);
    }

    #[test]
    fn intersection_floor_values() {
        assert_eq!(intersection_floor(3), 1);
        assert_eq!(intersection_floor(10), 4);
        assert_eq!(intersection_floor(9), 3);
        for n in 0..200 {
            assert!(3 * intersection_floor(n) >= n as u64);
        }
    }

    #[test]
    fn refine_stops_immediately_on_geometric_triple() {
        let a = FSet::from_ints(q(), [1, 2, 4]);
        assert!(matches!(refine_43(&a, &a, false), Err(Error::SetTooSmall(_))));
        let r = refine_43(&a, &a, true).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.max_iterations, 2);
        assert_eq!(r.subset, a);
        assert!(!r.guarantee_regime);
    }

    #[test]
    fn refine_subgroup_of_order_30() {
        let f = FieldCtx::prime(4294967311).unwrap();
        let g = f.pow(&f.primitive_root().unwrap(), (4294967311 - 1) / 30);
        let h = FSet::new(f, (0..30).map(|i| f.pow(&g, i))).unwrap();
        assert_eq!(h.len(), 30);
        let r = refine_43(&h, &h, false).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= r.max_iterations);
        assert!(r.subset.len() as f64 >= 30.0 / 3f64.exp());
        let last = r.trace.last().unwrap();
        assert!(last.popular_energy >= last.energy / 4.0);
    }
}
