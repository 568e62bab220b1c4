//! Statistical machinery shared by the simulation modules: counter-based
//! random streams, Wilson intervals, chi-square and Kolmogorov-Smirnov tests,
//! and compensated summation.

pub mod hypothesis;
pub mod interval;
pub mod stream;
pub mod sum;

pub use hypothesis::{
    bonferroni, chi_square_independence, chi_square_mutual_independence, ks_one_sample,
    ks_two_sample, uniform_cdf, TestReport, DEFAULT_ALPHA,
};
pub use interval::{normal_quantile, wilson_interval, Interval};
pub use stream::{mix64, namespace, trial_seed, unit_from_word, RandomStream};
pub use sum::{compensated_sum, CompensatedSum, MeanEstimate};
