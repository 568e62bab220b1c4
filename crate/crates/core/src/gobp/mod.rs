//! Generalized oriented bond percolation on `(N ∪ {0}) × Z^{d*}_{>=0}`: bond
//! fields, cluster growth, open-path counting, survival estimates and
//! bisection for the critical parameter.

pub mod bond;
pub mod cluster;
pub mod count;
pub mod critical;
pub mod martingale;
mod slab;
pub mod survival;

pub use bond::{BondField, BondModel, OrientedBond, TimeSpacePoint, MAX_SPATIAL_DIM};
pub use cluster::{grow_cluster, survives};
pub use count::{
    count_paths, normalized_total, one_step_continuations, CountMode, LayerCounts, LayerValues,
    PathCounter,
};
pub use critical::{
    bisect_critical, monotone_within_ci, BisectionConfig, CriticalSearchResult, ParameterAxis,
};
pub use martingale::{
    martingale_limit_study, trial_trajectory, CheckpointSummary, Histogram, MartingaleConfig,
    MartingaleStudy, DEFAULT_EPSILON,
};
pub use slab::MAX_SLAB_ENTRIES;
pub use survival::{count_survivors, survival_probability, SurvivalEstimate, CONFIDENCE};
