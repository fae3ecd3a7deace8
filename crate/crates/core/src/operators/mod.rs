//! Matrices of the quantum Hamiltonian formalism.
//!
//! Every operator is a [`TensorOperator`]: a canonical sparse matrix between
//! two spaces of the same lattice (the full `2^L` space or a particle-number
//! sector). Sector operators are built directly in the sector basis, so large
//! lattices never materialise the full space.

mod generator;
mod local;
mod sparse;
mod tensor;
mod transforms;
mod uq;

pub use generator::{
    build_generator, hopping_boundary, hopping_bulk, Boundary, GeneratorSpec,
};
pub use local::LocalOperator;
pub use sparse::SparseMatrix;
pub use tensor::{embed_local, embed_local_full, TensorOperator};
pub use transforms::{
    diagonal_v, number_w, q_pow_sz, reflection_operator, reversible_measure,
    reversible_weight,
};
pub use uq::{s_z, uq_codomain, uq_generator, uq_site, Sign};

