//! Lattice sites, uniform perturbation fields, the support boxes `J(z)`,
//! oriented paths and the path-shift map.

pub mod field;
pub mod geometry;
pub mod path;

pub use field::{FieldLabel, PerturbationField};
pub use geometry::{j_box, AxisBox, Point, Site, MAX_DIM};
pub use path::{shift_map, shift_preimages, OrientedPath, ShiftedField};
