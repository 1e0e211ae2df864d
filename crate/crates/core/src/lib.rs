//! Regularized vacuum (Casimir) energies between Dirichlet boundaries.
//!
//! The crate covers a massless scalar field on an interval (with and without
//! a quartic derivative interaction) and the electromagnetic field between
//! parallel plates (with the Euler–Heisenberg correction). Divergent mode
//! sums are regularized either by zeta continuation or by an exponential
//! cutoff, and [`limits`] compares the two orders of regularization and
//! spatial integration.
//!
//! Natural units are used throughout (`ħ = c = 1`).

pub mod em3d;
pub mod error;
pub mod geometry;
pub mod limits;
pub mod quad;
pub mod regsum;
pub mod scalar1d;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{Geometry, Position};
pub use regsum::RegScheme;
