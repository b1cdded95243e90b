//! Full inequality chain for the shifted product bound on a subgroup coset.

use sumprod::descriptor::SetSpec;
use sumprod::verify::{proof_trace_shift, StepKind, TraceOptions};
use sumprod::Result;

fn main() -> Result<()> {
    let spec: SetSpec = "p=4294967311; elems=coset(3,30)".parse()?;
    let a = spec.realize()?;
    let t = proof_trace_shift(&a, &a, &a, &a, TraceOptions::default())?;
    println!("{spec}");
    println!("|P| = {}, |A'| = {}, |Q| = {}, Δ = {}", t.popular.len(), t.popular_subset.len(), t.q.len(), t.delta);
    println!("N = {}, |X| = {}", t.n, t.classes);
    println!("R₁: {} elements, Δ₁ = {}; R₂: {} elements, Δ₁' = {}", t.r1.len(), t.delta1, t.r2.len(), t.delta1_prime);
    println!("S₁: {} elements, Δ₂ = {}; S₂: {} elements, Δ₂' = {}", t.s1.len(), t.delta2, t.s2.len(), t.delta2_prime);
    for step in &t.steps {
        let tag = match step.kind {
            StepKind::Exact => "exact",
            StepKind::Asymptotic => "ratio",
        };
        println!("  {tag:<5} {:<32} {:.4}", step.name, step.ratio);
    }
    Ok(())
}
