//! Iterated refinement A_{i+1} = A_i' until the 4/3-energy stops collapsing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sumprod::popularity::refine_43;
use sumprod::search::random_subset;
use sumprod::{FieldCtx, Result};

fn main() -> Result<()> {
    let ctx = FieldCtx::prime(4_294_967_311)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_subset(ctx, 40, &mut rng)?;
    let b = random_subset(ctx, 30, &mut rng)?;
    let r = refine_43(&a, &b, false)?;
    println!(
        "|A| = {} -> |A₁| = {} in {} of at most {} iterations (converged: {})",
        a.len(),
        r.subset.len(),
        r.iterations,
        r.max_iterations,
        r.converged
    );
    for (i, step) in r.trace.iter().enumerate() {
        println!(
            "  step {i}: |A_i| = {:>2}, E_4/3 = {:>10.3}, |A_i'| = {:>2}, E_4/3' = {:>10.3}",
            step.size, step.energy, step.popular_size, step.popular_energy
        );
    }
    println!("|A₁| ≥ |A|/e³: {}", r.size_bound_holds());
    Ok(())
}
