//! Product and shock/antishock measures as state vectors, their density
//! profiles, and the duality functions built from the same operators.

mod duality;
mod product;

pub use duality::{
    duality_function, duality_function_tilde, lemma1_sides, RowPair, q_hat_operator, q_hat_product, s_tilde_operator,
    sam_via_algebra, sam_via_algebra_scaled,
};
pub use product::{
    bernoulli_vector, closed_form_density_k1, closed_form_density_k2, density_profile, kappa, restrict_particles,
    sam_vector, Fugacity, FugacityProfile, SamKind, SamSpec,
};
