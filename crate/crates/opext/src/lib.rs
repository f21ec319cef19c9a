//! Numerical toolkit for simultaneous operator extensions on pairs of
//! closed subspaces.
//!
//! Given bounded operators `A`, `B` (dense real matrices) and subspaces
//! `M`, `N` of a common ambient space, the central object is the operator
//! that agrees with `A` on `M` and with `B` on `N` simultaneously. The
//! crate constructs this extension through the Moore-Penrose inverse of
//! `P_{N⊥} P_M`, evaluates boundedness/closability/closedness criteria
//! through three independent routes (range inclusion, Halmos two-projection
//! form, Douglas factorization), and measures the asymptotic growth of the
//! extension norm along Galerkin truncations of classical ℓ² examples.

pub mod asymptotics;
pub mod douglas;
pub mod error;
pub mod extension;
pub mod gen;
pub mod halmos;
pub mod kernel;
pub mod projections;
pub mod quotient;
pub mod star;
pub mod subspace;

pub use error::{Error, Result};
pub use kernel::{Mat, Tolerance};
pub use subspace::Subspace;
