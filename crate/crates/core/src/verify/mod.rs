//! Mechanical checks of the algebraic identities, the duality relations
//! and the shock theorems.
//!
//! Every check returns a [`VerificationReport`]. Exact mode works over
//! Laurent polynomials in `ω = q^{1/D}` and passes only on a literal zero
//! residual; numeric mode evaluates at a concrete `q` against a tolerance.
//! Checks with [`Expectation::Nonzero`] are witnesses: they pass when the
//! identity fails off its hypotheses.

mod algebra;
mod appendix;
mod intertwining;
mod lemmas;
mod report;
mod suite;
mod theorems;

pub use algebra::{check_algebra, AlgebraFamily, AlgebraParams};
pub use appendix::{check_appendix_boundary_relations, check_pseudocommutator, BoundaryParams, PseudoParams};
pub use intertwining::{check_chain, check_proposition1, ChainKind, ChainParams, IntertwiningParams};
pub use lemmas::{check_lemmas, LemmaParams};
pub use report::{Expectation, VerificationReport};
pub use suite::{run_suite, Suite, SuiteConfig};
pub use theorems::{
    check_duality_theorem1, check_shock_theorem, check_theorem2, check_theorem3, ShockParams, ShockTheorem,
};

pub use crate::evolution::DrivingSpec;
