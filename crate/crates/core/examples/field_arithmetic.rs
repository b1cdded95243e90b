//! Arithmetic in `F_p` and `Q`, characteristic guards and subgroup orders.

use sumprod::field::{factorize, GuardExponent};
use sumprod::{FieldCtx, Result};

fn main() -> Result<()> {
    let f7 = FieldCtx::prime(7)?;
    let (x, y) = (f7.int(3), f7.int(5));
    println!("in F_7: 3·5 = {}, 3/5 = {}, 5^-1 = {}", f7.mul(&x, &y), f7.div(&x, &y)?, f7.inv(&y)?);

    let q = FieldCtx::rational();
    let half = q.parse("1/2")?;
    let third = q.parse("1/3")?;
    println!("in Q: 1/2 + 1/3 = {}, (1/2)/(1/3) = {}", q.add(&half, &third), q.div(&half, &third)?);

    match FieldCtx::prime(91) {
        Ok(_) => unreachable!("91 = 7·13"),
        Err(e) => println!("p = 91 rejected: {e}"),
    }

    let p = 4_294_967_311u64;
    let big = FieldCtx::prime(p)?;
    println!("p - 1 = {:?}", factorize(p - 1));
    println!("primitive root of F_{p}: {}", big.primitive_root().expect("prime field"));
    for n in [100u64, 256, 257] {
        println!("|A| = {n}: |A|^4 < p is {}", big.char_guard(n, GuardExponent::Quarter));
    }

    let f101 = FieldCtx::prime(101)?;
    for g in [36, 65] {
        println!("ord({g}) mod 101 = {}", f101.multiplicative_order(&f101.int(g)).expect("nonzero"));
    }
    Ok(())
}
