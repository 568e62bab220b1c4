use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bond::{check_spatial_dim, BondModel};
use super::cluster::survives;
use crate::error::{invalid, Result};
use crate::stats::{wilson_interval, Interval};

/// Confidence level of every reported proportion.
pub const CONFIDENCE: f64 = 0.95;

/// Finite-horizon survival proxy: the fraction of trials whose cluster from
/// the origin reaches level `horizon`, with a Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub model: BondModel,
    pub dstar: usize,
    pub horizon: u64,
    pub trials: u64,
    pub survivors: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SurvivalEstimate {
    pub fn parameter(&self) -> f64 {
        self.model.parameter()
    }

    pub fn interval(&self) -> Interval {
        Interval {
            low: self.ci_low,
            high: self.ci_high,
        }
    }
}

/// Number of surviving trials among `0..trials`.
pub fn count_survivors(model: BondModel, dstar: usize, horizon: u64, trials: u64, seed: u64) -> Result<u64> {
    model.validate()?;
    check_spatial_dim(dstar)?;
    if horizon == 0 {
        return Err(invalid("survival horizon must be at least 1"));
    }
    // Surface construction errors before fanning out.
    model.trial_field(dstar, horizon, seed, 0)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let field = model
                .trial_field(dstar, horizon, seed, i)
                .expect("model validated");
            survives(&field, horizon) as u64
        })
        .sum())
}

/// Estimates `P(origin reaches level horizon)` from `trials` independent
/// fields. Trial `i` uses the same underlying noise for every parameter value.
pub fn survival_probability(model: BondModel, dstar: usize, horizon: u64, trials: u64, seed: u64) -> Result<SurvivalEstimate> {
    if trials == 0 {
        return Err(invalid("survival estimate needs at least one trial"));
    }
    let survivors = count_survivors(model, dstar, horizon, trials, seed)?;
    let ci = wilson_interval(survivors, trials, CONFIDENCE)?;
    Ok(SurvivalEstimate {
        model,
        dstar,
        horizon,
        trials,
        survivors,
        point: survivors as f64 / trials as f64,
        ci_low: ci.low,
        ci_high: ci.high,
    })
}
