//! Finite-level estimators of the restricted measures on lattice
//! configurations, and the checks that the full lattice and the lattice with
//! the origin removed induce the same measure.

pub mod battery;
pub mod estimate;
pub mod event;
pub mod paths;
pub mod view;

pub use battery::{
    default_battery, random_paths, required_passes, run_lemma_battery, run_nkey_battery, BatteryEntry,
    LemmaBatteryReport, NkeyBatteryReport,
};
pub use estimate::{
    check_lemma_first, check_nkey, estimate_nu, Comparison, LemmaReport, MeasureEstimate, MeasureSide, NkeyReport,
    PathSumMode, COMPARISON_SIGMAS,
};
pub use event::{Constraint, CylinderEvent, Semantics};
pub use paths::{
    count_open_paths, enumerate_paths, path_count, path_open_indicator, BoxSide, PathBoxSystem,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use view::{sites_meeting, Configuration};
