//! Both sides of the fourth-energy, energy and shifted product bounds.

use sumprod::verify::{verify_e2, verify_e4, verify_shift, VerifyOptions};
use sumprod::{FSet, FieldCtx, Result};

fn main() -> Result<()> {
    let q = FieldCtx::rational();
    let a = FSet::from_ints(q, [1, 2, 4]);
    let opts = VerifyOptions::default();
    for r in [
        verify_e4(&a, &a, &a, opts)?,
        verify_e2(&a, &a, &a, opts)?,
        verify_shift(&a, &a, &a, &a, opts)?,
    ] {
        println!("{}: lhs {} rhs {} ratio {:.4}", r.theorem_id, r.lhs, r.rhs, r.ratio);
        for (flag, ok) in &r.flags {
            println!("    {flag}: {ok}");
        }
    }
    let r = verify_shift(&a, &a, &a, &a, VerifyOptions { strict: true })?;
    println!("strict mode notes: {:?}", r.notes);
    Ok(())
}
