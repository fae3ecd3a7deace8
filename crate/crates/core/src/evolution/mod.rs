//! Numerical semigroup action `e^{−Ht}`, conditioned transition tables,
//! and decomposition of evolved measures over the SAM family.
//!
//! All routines here work in `f64`. Sums are taken in a fixed order, so
//! results do not depend on the number of threads.

mod decompose;
mod expm;
mod table;

pub use decompose::{decompose_onto_sams, sam_family, Decomposition};
pub use expm::{dense_propagator, expm_action, propagator_matrix, ExpmOptions, Method, DENSE_MAX_DIM};
pub use table::{position_lists, positions_field, transition_table, DrivingKind, DrivingSpec, TransitionTable};
