use serde::{Deserialize, Serialize};

use super::bond::{check_spatial_dim, BondModel};
use super::survival::{survival_probability, SurvivalEstimate};
use crate::error::{invalid, Error, Result};

/// Which parameter the bisection moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterAxis {
    /// Bernoulli bond probability `p`.
    P,
    /// Perturbation amplitude `L` of the coupled field.
    L,
}

impl ParameterAxis {
    pub fn model(self, value: f64) -> BondModel {
        match self {
            ParameterAxis::P => BondModel::Bernoulli { p: value },
            ParameterAxis::L => BondModel::Coupled { amplitude: value },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    pub axis: ParameterAxis,
    pub dstar: usize,
    pub horizon: u64,
    /// Trials per evaluation before any escalation.
    pub trials: u64,
    /// Escalation doubles the trial count up to this budget.
    pub max_trials: u64,
    pub threshold: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub low: f64,
    pub high: f64,
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        check_spatial_dim(self.dstar)?;
        if self.horizon == 0 {
            return Err(invalid("bisection horizon must be at least 1"));
        }
        if self.trials == 0 || self.max_trials < self.trials {
            return Err(invalid(format!(
                "need 1 <= trials ({}) <= max_trials ({})",
                self.trials, self.max_trials
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.low < self.high) {
            return Err(invalid(format!(
                "bracket must satisfy low < high, got [{}, {}]",
                self.low, self.high
            )));
        }
        self.axis.model(self.low).validate()?;
        self.axis.model(self.high).validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearchResult {
    pub config: BisectionConfig,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub low_estimate: SurvivalEstimate,
    pub high_estimate: SurvivalEstimate,
    /// Number of midpoints evaluated.
    pub iterations: usize,
    /// Every resolved evaluation (both endpoints, then each midpoint) in order.
    pub trace: Vec<SurvivalEstimate>,
}

impl CriticalSearchResult {
    pub fn width(&self) -> f64 {
        self.bracket_high - self.bracket_low
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Below,
    Above,
}

/// Evaluates the proxy at `value`, doubling the trial count while the Wilson
/// interval still contains the threshold.
fn classify(cfg: &BisectionConfig, value: f64) -> Result<(Side, SurvivalEstimate)> {
    let model = cfg.axis.model(value);
    let mut trials = cfg.trials;
    loop {
        let est = survival_probability(model, cfg.dstar, cfg.horizon, trials, cfg.seed)?;
        if est.ci_high < cfg.threshold {
            return Ok((Side::Below, est));
        }
        if est.ci_low > cfg.threshold {
            return Ok((Side::Above, est));
        }
        if trials.saturating_mul(2) > cfg.max_trials {
            return Err(Error::EscalationExhausted {
                parameter: value,
                trials,
                estimate: est.point,
            });
        }
        trials *= 2;
    }
}

/// Bisects for the parameter at which the finite-horizon survival proxy
/// crosses `threshold`.
///
/// Every evaluation is resolved to one side of the threshold with a Wilson
/// interval excluding it, so the returned endpoints have disjoint intervals
/// on either side of the threshold.
pub fn bisect_critical(cfg: &BisectionConfig) -> Result<CriticalSearchResult> {
    cfg.validate()?;
    let (low_side, low_est) = classify(cfg, cfg.low)?;
    let (high_side, high_est) = classify(cfg, cfg.high)?;
    if low_side != Side::Below || high_side != Side::Above {
        return Err(Error::NonStraddlingBracket {
            threshold: cfg.threshold,
            low: cfg.low,
            high: cfg.high,
            low_estimate: low_est.point,
            high_estimate: high_est.point,
        });
    }
    let mut trace = vec![low_est, high_est];
    let (mut lo, mut hi) = ((cfg.low, low_est), (cfg.high, high_est));
    let mut iterations = 0;
    while hi.0 - lo.0 > cfg.tolerance {
        let mid = 0.5 * (lo.0 + hi.0);
        let (side, est) = classify(cfg, mid)?;
        trace.push(est);
        iterations += 1;
        match side {
            Side::Below => lo = (mid, est),
            Side::Above => hi = (mid, est),
        }
    }
    Ok(CriticalSearchResult {
        config: cfg.clone(),
        bracket_low: lo.0,
        bracket_high: hi.0,
        low_estimate: lo.1,
        high_estimate: hi.1,
        iterations,
        trace,
    })
}

/// Whether the estimates in `trace` are consistent with a nondecreasing
/// proxy: for every pair at parameters `a < b`, `ci_low(a) <= ci_high(b)`.
pub fn monotone_within_ci(trace: &[SurvivalEstimate]) -> bool {
    trace.iter().all(|a| {
        trace
            .iter()
            .filter(|b| a.parameter() < b.parameter())
            .all(|b| a.ci_low <= b.ci_high)
    })
}
