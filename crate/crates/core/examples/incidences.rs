//! Incidences between C(A+1) × S_τ and the lines y = (x/c - 1)/d.

use sumprod::energy::rep_function;
use sumprod::incidence::{all_bucket_checks, count_incidences, sdz_bound, CountMethod, LineFamily, PointGrid};
use sumprod::{FSet, FieldCtx, Result, SetOp};

fn main() -> Result<()> {
    let q = FieldCtx::rational();
    let a = FSet::from_ints(q, [1, 2, 4]);
    for (bucket, direct, swapped) in all_bucket_checks(&a, &a, &a)? {
        println!(
            "τ = {}, S = {}: I = {} ≥ {} ({}), swapped I = {} ≥ {} ({})",
            bucket.tau,
            bucket.members,
            direct.incidences,
            direct.required,
            direct.holds,
            swapped.incidences,
            swapped.required,
            swapped.holds
        );
    }

    let f101 = FieldCtx::prime(101)?;
    let h = FSet::from_ints(f101, [1, 65, 84, 6, 87, 100, 36, 17, 95, 14]);
    let s = rep_function(&h, &h, SetOp::Ratio)?.support();
    let grid = PointGrid::new(h.shifted_product(&h, &f101.one())?, s)?;
    let lines = LineFamily::shift_lines(&h, &h)?;
    let hashed = count_incidences(&grid, &lines, CountMethod::Hashed);
    let brute = count_incidences(&grid, &lines, CountMethod::BruteForce);
    let bound = sdz_bound(grid.xs.len() as u64, grid.ys.len() as u64, lines.len() as u64, Some(101));
    println!("subgroup of order 10 mod 101: I = {hashed} (brute force {brute}), bound {:.1}", bound.value);
    Ok(())
}
