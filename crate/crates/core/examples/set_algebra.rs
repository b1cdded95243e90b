//! Sumsets, product sets, ratio sets and shifted products, plus the set
//! descriptor grammar.

use sumprod::descriptor::SetSpec;
use sumprod::{FSet, FieldCtx, Result, SetOp};

fn main() -> Result<()> {
    let q = FieldCtx::rational();
    let a = FSet::from_ints(q, [1, 2, 4]);
    println!("A          = {a}");
    println!("A + A      = {}", a.sumset(&a)?);
    println!("AA         = {}", a.product(&a)?);
    println!("A/A        = {}", a.ratio(&a)?);
    println!("A(A+1)     = {}", a.shifted_product(&a, &q.one())?);
    println!("A(A-1)     = {}", a.shifted_product(&a, &q.int(-1))?);
    println!("A - A      = {}", a.combine(&a, SetOp::Difference)?);

    let f13 = FieldCtx::prime(13)?;
    let b = FSet::from_ints(f13, [2, 5, 7]);
    let lambda = f13.int(3);
    println!(
        "in F_13, |(3B)((3B)+3)| = |B(B+1)|: {}",
        b.dilate_invariance_check(&b, &lambda)?
    );

    for text in ["p=101; elems=subgroup(65,10)", "p=rational; elems=gp(2,5)", "p=4294967311; elems=coset(3,30)"] {
        let spec: SetSpec = text.parse()?;
        let set = spec.realize()?;
        println!("{spec}: |A| = {}, |AA| = {}", set.len(), set.product(&set)?.len());
    }
    Ok(())
}
