//! Popular products P ⊆ AB and the popular subset A'.

use sumprod::descriptor::SetSpec;
use sumprod::popularity::{intersection_bound_check, intersection_floor, popular_decompose};
use sumprod::{FSet, FieldCtx, Result};

fn main() -> Result<()> {
    let q = FieldCtx::rational();
    let a = FSet::from_ints(q, [1, 2, 4]);
    let d = popular_decompose(&a, &a)?;
    println!("A = {a}: threshold {:.4}, P = {}, A' = {}", d.threshold_p, d.popular, d.popular_subset);
    println!("covered pairs {} of {}", d.covered_pairs, d.total_pairs);

    let spec: SetSpec = "p=4294967311; elems=coset(7,45)".parse()?;
    let h = spec.realize()?;
    let d = popular_decompose(&h, &h)?;
    println!(
        "{spec}: |P| = {}, |A'| = {}, coverage bound {}, subset bound {}",
        d.popular.len(),
        d.popular_subset.len(),
        d.coverage_bound_holds(),
        d.subset_bound_holds()
    );
    let inter = intersection_bound_check(&d.popular_subset, &h, &d.popular);
    println!("min intersection {:?} (floor {})", inter, intersection_floor(h.len()));
    Ok(())
}
