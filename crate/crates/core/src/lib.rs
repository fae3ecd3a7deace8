//! Weighted generators of the asymmetric simple exclusion process on a ring,
//! the `U_q[sl(2)]` operators that intertwine them, shock/antishock product
//! measures, and executable checks of the duality relations that connect
//! them.
//!
//! Identities polynomial in fractional powers of `q` are certified in exact
//! Laurent arithmetic; statements about the semigroup `e^{−Ht}` are checked
//! numerically against independent propagators.

pub mod error;
pub mod evolution;
pub mod measures;
pub mod operators;
pub mod scalar;
pub mod statespace;
pub mod vector;
pub mod verify;

#[doc(hidden)]
pub mod cli;

pub use error::{Error, Result};
pub use scalar::{ExactField, Field, Laurent, Mode, NumericField, QExponent, Scalar};
pub use statespace::{Configuration, PositionList, SectorBasis, Space};
pub use vector::StateVector;
