//! Growth exponents of |A(A+1)| and |AA| + |(A+1)(A+1)| on subgroup cosets.

use sumprod::search::{generate_family, Family};
use sumprod::verify::{verify_corollary, VerifyOptions, COROLLARY_EXPONENT};
use sumprod::{FieldCtx, Result};

fn main() -> Result<()> {
    let ctx = FieldCtx::prime(4_294_967_311)?;
    println!("target exponent {COROLLARY_EXPONENT:.4}");
    println!("{:>5} {:>10} {:>8} {:>14} {:>8}", "|A|", "|A(A+1)|", "exp", "|AA|+|..|", "exp");
    for order in [10usize, 15, 18, 30, 45, 90] {
        let a = generate_family(ctx, &Family::SubgroupCoset { shift: ctx.int(2), order })?;
        let c = verify_corollary(&a, VerifyOptions::default())?;
        println!(
            "{:>5} {:>10} {:>8.4} {:>14} {:>8.4}",
            order,
            c.shift_product.lhs.to_string(),
            c.shift_product.metrics["exponent"],
            c.two_products.lhs.to_string(),
            c.two_products.metrics["exponent"]
        );
    }
    Ok(())
}
