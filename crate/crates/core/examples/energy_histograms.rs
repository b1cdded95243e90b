//! Representation functions, moment energies and dyadic buckets.

use sumprod::energy::{dyadic_buckets, energy_bruteforce, rep_function, richest_bucket};
use sumprod::{FSet, FieldCtx, Moment, Result, SetOp};

fn main() -> Result<()> {
    let q = FieldCtx::rational();
    let a = FSet::from_ints(q, [1, 2, 4]);
    let h = rep_function(&a, &a, SetOp::Ratio)?;
    println!("r_(A/A):");
    for (x, r) in h.counts() {
        println!("  {x:>4} -> {r}");
    }
    for n in 1..=4 {
        let fast = h.energy_int(n);
        let slow = energy_bruteforce(&a, &a, SetOp::Ratio, n)?;
        println!("E_{n}(A) = {fast} (brute force {slow})");
    }
    println!("E_4/3(A) = {:.6}", h.energy_real(Moment::FOUR_THIRDS));

    for b in dyadic_buckets(&h) {
        println!("bucket τ = {}: {} (weight {})", b.tau, b.members, b.weight);
    }
    let rich = richest_bucket(&h, Moment::FOUR_THIRDS)?;
    println!("richest 4/3 bucket: τ = {}, |S| = {}", rich.tau, rich.len());

    let ab = rep_function(&a, &a, SetOp::Product)?;
    let one = FSet::from_ints(q, [1]);
    let triples = ab.combine(&rep_function(&a, &one, SetOp::Product)?, SetOp::Ratio)?;
    println!("r_(BA/A) counts {} triples over {} values", triples.total(), triples.len());
    Ok(())
}
