//! Generalized oriented bond percolation coupled to uniformly perturbed
//! lattices.
//!
//! The crate is organized bottom-up:
//!
//! - [`stats`]: counter-based random streams and the statistical tests used
//!   to validate simulations.
//! - [`lattice`]: sites, perturbation fields, support boxes and oriented paths.
//! - [`gobp`]: bond fields, cluster growth, open-path counting, survival
//!   estimates and critical-parameter bisection.
//! - [`coupling`]: the embedding of time-space into `Z^d` and the box-overlap
//!   rule that turns two perturbation fields into a bond field.
//! - [`measures`]: finite-horizon path-summed measures on cylinder events of
//!   the perturbed lattice and of the lattice with the origin removed.

pub mod coupling;
pub mod error;
pub mod gobp;
pub mod lattice;
pub mod measures;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{AxisBox, FieldLabel, OrientedPath, PerturbationField, Point, Site};
