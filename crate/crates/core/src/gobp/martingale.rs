use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bond::{check_probability, check_spatial_dim, BondModel};
use super::count::{CountMode, PathCounter};
use super::survival::CONFIDENCE;
use crate::error::{invalid, Result};
use crate::stats::{wilson_interval, Interval, MeanEstimate};

/// Default cutoff for the event `|N̄_T| > ε`.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleConfig {
    pub p: f64,
    pub dstar: usize,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub epsilon: f64,
    /// Extra levels at which to record `|N̄_t|`; the horizon is always included.
    pub checkpoints: Vec<u64>,
    pub histogram_bins: usize,
}

impl MartingaleConfig {
    pub fn new(p: f64, dstar: usize, horizon: u64, trials: u64, seed: u64) -> Self {
        Self {
            p,
            dstar,
            horizon,
            trials,
            seed,
            epsilon: DEFAULT_EPSILON,
            checkpoints: Vec::new(),
            histogram_bins: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.p == 0.0 {
            return Err(invalid("martingale study needs p > 0"));
        }
        check_spatial_dim(self.dstar)?;
        if self.horizon == 0 {
            return Err(invalid("martingale horizon must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("martingale study needs at least one trial"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c > self.horizon) {
            return Err(invalid(format!("checkpoint {c} beyond horizon {}", self.horizon)));
        }
        if self.histogram_bins == 0 {
            return Err(invalid("histogram needs at least one bin"));
        }
        Ok(())
    }

    fn levels(&self) -> Vec<u64> {
        let mut levels = self.checkpoints.clone();
        levels.push(self.horizon);
        levels.sort_unstable();
        levels.dedup();
        levels
    }
}

/// Summary of `|N̄_t|` across trials at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub level: u64,
    pub mean: MeanEstimate,
    /// Trials with `|N̄_t| > ε`.
    pub above: u64,
    pub fraction: f64,
    pub ci: Interval,
}

/// Histogram of `log10 |N̄_T|`; values at or below the lowest edge (zeros
/// included) are counted in `underflow`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub log10_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
}

impl Histogram {
    fn build(values: &[f64], epsilon: f64, bins: usize) -> Self {
        let lo = if epsilon > 0.0 { epsilon.log10().floor() - 3.0 } else { -12.0 };
        let max = values.iter().copied().fold(0.0f64, f64::max);
        let hi = if max > 0.0 { max.log10().ceil().max(lo + 1.0) } else { lo + 1.0 };
        let width = (hi - lo) / bins as f64;
        let log10_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        let mut underflow = 0;
        for &v in values {
            if v <= 0.0 || v.log10() <= lo {
                underflow += 1;
                continue;
            }
            let k = (((v.log10() - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self {
            log10_edges,
            counts,
            underflow,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleStudy {
    pub config: MartingaleConfig,
    /// `|N̄_T|` of every trial, in trial order.
    pub values: Vec<f64>,
    pub checkpoints: Vec<CheckpointSummary>,
    pub histogram: Histogram,
}

impl MartingaleStudy {
    pub fn final_summary(&self) -> &CheckpointSummary {
        self.checkpoints.last().expect("horizon always recorded")
    }

    pub fn at_level(&self, level: u64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.level == level)
    }

    /// Fraction of trials with `|N̄_T| > ε`.
    pub fn surviving_fraction(&self) -> f64 {
        self.final_summary().fraction
    }

    /// Whether the surviving fraction strictly decreases across checkpoints.
    pub fn fractions_decreasing(&self) -> bool {
        self.checkpoints.windows(2).all(|w| w[1].fraction < w[0].fraction)
    }
}

/// Values of `|N̄_t|` at each requested level for one Bernoulli trial.
pub fn trial_trajectory(config: &MartingaleConfig, trial: u64) -> Result<Vec<f64>> {
    let levels = config.levels();
    if config.p == 1.0 {
        // Every bond is open, so N_t = (d*+1)^t; scaled arithmetic would
        // only reproduce the exact value 1 up to rounding.
        return Ok(vec![1.0; levels.len()]);
    }
    let field = BondModel::Bernoulli { p: config.p }.trial_field(config.dstar, config.horizon, config.seed, trial)?;
    let mut counter = PathCounter::new(&field, CountMode::Scaled)?;
    let mut out = Vec::with_capacity(levels.len());
    for &level in &levels {
        if counter.is_extinct() {
            out.push(0.0);
            continue;
        }
        counter.run_to(level)?;
        out.push(counter.normalized_total());
    }
    Ok(out)
}

/// Runs `trials` independent path-count sweeps and summarizes `|N̄_t|` at the
/// checkpoints: mean with standard error, and the fraction above `ε` with a
/// Wilson interval.
pub fn martingale_limit_study(config: &MartingaleConfig) -> Result<MartingaleStudy> {
    config.validate()?;
    trial_trajectory(config, 0)?;
    let levels = config.levels();
    let trajectories: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|i| trial_trajectory(config, i).expect("config validated"))
        .collect();
    let mut checkpoints = Vec::with_capacity(levels.len());
    for (k, &level) in levels.iter().enumerate() {
        let column: Vec<f64> = trajectories.iter().map(|tr| tr[k]).collect();
        let above = column.iter().filter(|&&v| v > config.epsilon).count() as u64;
        checkpoints.push(CheckpointSummary {
            level,
            mean: MeanEstimate::from_values(&column),
            above,
            fraction: above as f64 / config.trials as f64,
            ci: wilson_interval(above, config.trials, CONFIDENCE)?,
        });
    }
    let values: Vec<f64> = trajectories.iter().map(|tr| *tr.last().expect("nonempty")).collect();
    let histogram = Histogram::build(&values, config.epsilon, config.histogram_bins);
    Ok(MartingaleStudy {
        config: config.clone(),
        values,
        checkpoints,
        histogram,
    })
}
