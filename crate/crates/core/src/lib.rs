//! Exact-arithmetic laboratory for shifted product sets.
//!
//! The crate computes the finite objects that appear in sum-product
//! arguments over arbitrary fields: shifted product sets `C(A+λ)`,
//! representation functions and their moment energies, dyadic level sets,
//! popular product sets, point-line incidences for the shifted-line
//! families, and full inequality chains for the bound
//! `|AB|^8 |C(A+1)|^2 |D(B-1)|^8 ≳ |B|^13 |A|^5 |C|^3 |D|`.
//!
//! Everything is computed in `F_p` or in `Q` with exact integer and rational
//! arithmetic. Inequalities that only hold up to absolute constants and
//! logarithmic factors are never pass/fail; they are reported as ratios.
//! Inequalities that are constant-free are hard-asserted.
//!
//! The `examples/` directory of this crate has one runnable program per
//! capability:
//!
//! ```text
//! cargo run --example field_arithmetic
//! cargo run --example set_algebra
//! cargo run --example energy_histograms
//! cargo run --example popular_products
//! cargo run --example refinement
//! cargo run --example incidences
//! cargo run --example verify_theorems
//! cargo run --example proof_trace
//! cargo run --example corollary_ledger
//! cargo run --example extremal_search
//! ```

pub mod cli;
pub mod descriptor;
pub mod energy;
pub mod error;
pub mod field;
pub mod incidence;
pub mod numeric;
pub mod popularity;
pub mod search;
pub mod setops;
pub mod verify;

pub use energy::{DyadicBucket, Energy, Moment, RepHistogram};
pub use error::{Error, Result};
pub use field::{Element, FieldCtx, GuardExponent};
pub use popularity::{PopularityDecomposition, Refinement};
pub use setops::{FSet, SetOp};
pub use verify::{Quantity, StepKind, TraceStep, VerificationReport};
