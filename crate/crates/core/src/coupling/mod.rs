//! The bridge between perturbed lattices and oriented percolation: the
//! time-space embedding, the box-overlap rule for open bonds, the effective
//! bond probability and the statistical independence battery.

pub mod embedding;
pub mod independence;
pub mod realization;

pub use embedding::Embedding;
pub use independence::{
    standard_tuples, verify_independence, BondSpec, BondTuple, IndependenceReport, TupleKind,
    TupleReport,
};
pub use realization::{count_open_bonds, p_hat, CoupledBondRealization};

use crate::error::{invalid, Result};
use crate::gobp::BondField;

/// Drives oriented percolation in time-space with the coupled rule: the
/// time-space bond `<(t-1, z), (t, w)>` is open iff the embedded `Z^d` bond
/// is open under `realization`.
pub fn coupled_bond_field(realization: CoupledBondRealization, embedding: Embedding, horizon: u64) -> Result<BondField> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    BondField::coupled(realization, embedding, horizon)
}
