//! Exhaustive and hill-climbing searches for sets with few shifted products.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sumprod::search::{exhaustive, hill_climb, random_subset, write_ledger, Objective};
use sumprod::{FieldCtx, Result};

fn main() -> Result<()> {
    let mut records = Vec::new();
    for (p, n) in [(7, 2), (13, 3), (31, 4)] {
        let ctx = FieldCtx::prime(p)?;
        for objective in [Objective::ShiftProduct, Objective::TwoProducts] {
            records.push(exhaustive(ctx, n, objective)?);
        }
    }
    let ctx = FieldCtx::prime(101)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let start = random_subset(ctx, 6, &mut rng)?;
    records.push(hill_climb(&start, Objective::ShiftProduct, 2000, 42)?);
    write_ledger(std::io::stdout(), &records, true)?;
    Ok(())
}
