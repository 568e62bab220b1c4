use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bond::{check_probability, BondField};
use super::slab::Frontier;
use crate::error::{invalid, Result};
use crate::lattice::Site;
use crate::stats::{trial_seed, CompensatedSum, MeanEstimate};

/// Arithmetic used for path counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Exact big-integer counts `N_{t,z}`.
    Exact,
    /// Floating-point counts divided by `((d*+1) p)^t` as the sweep goes.
    Scaled,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerValues {
    Exact(Vec<(Site, BigUint)>),
    Scaled(Vec<(Site, f64)>),
}

/// Path counts at one level, sorted by site. Only sites with a nonzero count
/// are listed.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCounts {
    pub level: u64,
    pub dstar: usize,
    /// `t * ln((d*+1) p)` in scaled mode, 0 in exact mode.
    pub scale_log: f64,
    pub values: LayerValues,
}

impl LayerCounts {
    pub fn mode(&self) -> CountMode {
        match self.values {
            LayerValues::Exact(_) => CountMode::Exact,
            LayerValues::Scaled(_) => CountMode::Scaled,
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            LayerValues::Exact(v) => v.len(),
            LayerValues::Scaled(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sites(&self) -> Vec<Site> {
        match &self.values {
            LayerValues::Exact(v) => v.iter().map(|(z, _)| *z).collect(),
            LayerValues::Scaled(v) => v.iter().map(|(z, _)| *z).collect(),
        }
    }

    /// Exact `N_{t,z}`; `None` in scaled mode.
    pub fn exact(&self, z: &Site) -> Option<BigUint> {
        match &self.values {
            LayerValues::Exact(v) => Some(
                v.binary_search_by(|(s, _)| s.cmp(z))
                    .map(|i| v[i].1.clone())
                    .unwrap_or_default(),
            ),
            LayerValues::Scaled(_) => None,
        }
    }

    /// Exact `|N_t|`; `None` in scaled mode.
    pub fn exact_total(&self) -> Option<BigUint> {
        match &self.values {
            LayerValues::Exact(v) => Some(v.iter().map(|(_, n)| n).sum()),
            LayerValues::Scaled(_) => None,
        }
    }

    /// Stored value at `z`: the count in exact mode (rounded to `f64`), the
    /// scaled count otherwise.
    pub fn stored(&self, z: &Site) -> f64 {
        match &self.values {
            LayerValues::Exact(v) => v
                .binary_search_by(|(s, _)| s.cmp(z))
                .map(|i| v[i].1.to_f64().unwrap_or(f64::INFINITY))
                .unwrap_or(0.0),
            LayerValues::Scaled(v) => v
                .binary_search_by(|(s, _)| s.cmp(z))
                .map(|i| v[i].1)
                .unwrap_or(0.0),
        }
    }

    /// Per-site `N_{t,z} / ((d*+1) p)^t`.
    pub fn normalized_entries(&self, p: f64) -> Result<Vec<(Site, f64)>> {
        let base = normalization_base(self.dstar, p)?;
        Ok(match &self.values {
            LayerValues::Exact(v) => {
                let denom = base_power(self.dstar, self.level);
                let pt = p.powi(self.level as i32);
                v.iter()
                    .map(|(z, n)| (*z, big_ratio(n, &denom) / pt))
                    .collect()
            }
            LayerValues::Scaled(v) => {
                let factor = rescale(self.scale_log, self.level, base);
                v.iter().map(|(z, x)| (*z, x * factor)).collect()
            }
        })
    }
}

fn normalization_base(dstar: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if p == 0.0 {
        return Err(invalid("normalization by ((d*+1) p)^t needs p > 0"));
    }
    Ok((dstar + 1) as f64 * p)
}

fn base_power(dstar: usize, t: u64) -> BigUint {
    num_traits::pow(BigUint::from(dstar as u64 + 1), t as usize)
}

fn rescale(scale_log: f64, t: u64, base: f64) -> f64 {
    let target = t as f64 * base.ln();
    if target == scale_log {
        1.0
    } else {
        (scale_log - target).exp()
    }
}

/// `n / d` rounded to `f64`; exact whenever the quotient is a power of two
/// times a 53-bit integer, in particular when `n == d`.
fn big_ratio(n: &BigUint, d: &BigUint) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let shift = (d.bits() + 64).saturating_sub(n.bits());
    let q: BigUint = (n << shift) / d;
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    qf * 2f64.powi(-(shift as i32))
}

/// `|N̄_t| = |N_t| / ((d*+1) p)^t`.
pub fn normalized_total(counts: &LayerCounts, p: f64) -> Result<f64> {
    let base = normalization_base(counts.dstar, p)?;
    match &counts.values {
        LayerValues::Exact(_) => {
            let total = counts.exact_total().expect("exact layer");
            let ratio = big_ratio(&total, &base_power(counts.dstar, counts.level));
            Ok(ratio / p.powi(counts.level as i32))
        }
        LayerValues::Scaled(v) => {
            let sum: CompensatedSum = v.iter().map(|(_, x)| *x).collect();
            Ok(sum.value() * rescale(counts.scale_log, counts.level, base))
        }
    }
}

enum CounterState {
    Exact(Frontier<BigUint>),
    Scaled {
        frontier: Frontier<f64>,
        inv_base: f64,
        base_log: f64,
    },
}

/// Level-by-level dynamic programme for `N_{t,z}`:
/// `N_{t,w} = Σ_z η(t, z -> w) N_{t-1,z}`, starting from `N_{0,0} = 1`.
pub struct PathCounter<'a> {
    field: &'a BondField,
    state: CounterState,
}

impl<'a> PathCounter<'a> {
    pub fn new(field: &'a BondField, mode: CountMode) -> Result<Self> {
        let dstar = field.spatial_dim();
        let horizon = field.horizon();
        let state = match mode {
            CountMode::Exact => CounterState::Exact(Frontier::new(dstar, horizon, BigUint::one())?),
            CountMode::Scaled => {
                let base = normalization_base(dstar, field.effective_p())?;
                CounterState::Scaled {
                    frontier: Frontier::new(dstar, horizon, 1.0)?,
                    inv_base: 1.0 / base,
                    base_log: base.ln(),
                }
            }
        };
        Ok(Self { field, state })
    }

    pub fn level(&self) -> u64 {
        match &self.state {
            CounterState::Exact(f) => f.level(),
            CounterState::Scaled { frontier, .. } => frontier.level(),
        }
    }

    /// True once no open path reaches the current level.
    pub fn is_extinct(&self) -> bool {
        match &self.state {
            CounterState::Exact(f) => f.is_empty(),
            CounterState::Scaled { frontier, .. } => frontier.is_empty(),
        }
    }

    pub fn step(&mut self) -> Result<()> {
        if self.level() >= self.field.horizon() {
            return Err(invalid(format!(
                "cannot count past the field horizon {}",
                self.field.horizon()
            )));
        }
        match &mut self.state {
            CounterState::Exact(f) => f.advance(self.field),
            CounterState::Scaled {
                frontier, inv_base, ..
            } => {
                frontier.advance(self.field);
                let inv = *inv_base;
                frontier.for_each_mut(|x| *x *= inv);
            }
        }
        Ok(())
    }

    pub fn run_to(&mut self, level: u64) -> Result<()> {
        while self.level() < level {
            self.step()?;
        }
        Ok(())
    }

    /// `|N̄_t|` at the current level.
    pub fn normalized_total(&self) -> f64 {
        match &self.state {
            CounterState::Exact(_) => normalized_total(&self.layer(), self.field.effective_p())
                .expect("validated at construction"),
            CounterState::Scaled { frontier, .. } => frontier
                .entries()
                .map(|(_, x)| *x)
                .collect::<CompensatedSum>()
                .value(),
        }
    }

    pub fn layer(&self) -> LayerCounts {
        let dstar = self.field.spatial_dim();
        let level = self.level();
        match &self.state {
            CounterState::Exact(f) => {
                let mut v: Vec<(Site, BigUint)> = f.entries().map(|(z, n)| (z, n.clone())).collect();
                v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                LayerCounts {
                    level,
                    dstar,
                    scale_log: 0.0,
                    values: LayerValues::Exact(v),
                }
            }
            CounterState::Scaled {
                frontier, base_log, ..
            } => {
                let mut v: Vec<(Site, f64)> = frontier.entries().map(|(z, x)| (z, *x)).collect();
                v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                LayerCounts {
                    level,
                    dstar,
                    scale_log: level as f64 * base_log,
                    values: LayerValues::Scaled(v),
                }
            }
        }
    }
}

/// Layers `t = 0..=horizon` of the open-path counts from the origin.
pub fn count_paths(field: &BondField, horizon: u64, mode: CountMode) -> Result<Vec<LayerCounts>> {
    if horizon > field.horizon() {
        return Err(invalid(format!(
            "requested horizon {horizon} exceeds field horizon {}",
            field.horizon()
        )));
    }
    let mut counter = PathCounter::new(field, mode)?;
    let mut layers = Vec::with_capacity(horizon as usize + 1);
    layers.push(counter.layer());
    for _ in 0..horizon {
        counter.step()?;
        layers.push(counter.layer());
    }
    Ok(layers)
}

/// Resamples the bonds into level `t + 1` `continuations` times with the
/// level-`t` counts frozen and returns the mean of `|N̄_{t+1}|`.
///
/// By the martingale property the mean estimates `|N̄_t|`.
pub fn one_step_continuations(layer: &LayerCounts, p: f64, continuations: u64, seed: u64) -> Result<MeanEstimate> {
    let base = normalization_base(layer.dstar, p)?;
    let entries = layer.normalized_entries(p)?;
    let t = layer.level + 1;
    let dstar = layer.dstar;
    // Validates the probability and dimension once.
    BondField::bernoulli(p, seed, dstar, t)?;
    let values: Vec<f64> = (0..continuations)
        .into_par_iter()
        .map(|k| {
            let field = BondField::bernoulli(p, trial_seed(seed, k), dstar, t).expect("validated");
            entries
                .iter()
                .map(|(z, x)| {
                    let open = (0..=dstar).filter(|&dir| field.open_dir(t, z, dir)).count();
                    x * open as f64 / base
                })
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();
    Ok(MeanEstimate::from_values(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[i64]) -> Site {
        Site::new(c).unwrap()
    }

    #[test]
    fn full_cone_counts() {
        let f = BondField::bernoulli(1.0, 0, 2, 3).unwrap();
        let layers = count_paths(&f, 3, CountMode::Exact).unwrap();
        assert_eq!(layers[3].exact_total().unwrap(), BigUint::from(27u32));
        let f = BondField::bernoulli(1.0, 0, 1, 3).unwrap();
        let layers = count_paths(&f, 3, CountMode::Exact).unwrap();
        assert_eq!(layers[3].exact(&s(&[1])).unwrap(), BigUint::from(3u32));
        assert_eq!(layers[3].exact(&s(&[3])).unwrap(), BigUint::from(1u32));
        assert_eq!(layers[3].exact(&s(&[4])).unwrap(), BigUint::zero());
    }

    #[test]
    fn normalization_is_exact_at_full_probability() {
        for dstar in 1..=3 {
            let f = BondField::bernoulli(1.0, 0, dstar, 20).unwrap();
            for layer in count_paths(&f, 20, CountMode::Exact).unwrap() {
                assert_eq!(normalized_total(&layer, 1.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn level_zero_is_one() {
        let f = BondField::bernoulli(0.3, 4, 2, 5).unwrap();
        for mode in [CountMode::Exact, CountMode::Scaled] {
            let layers = count_paths(&f, 0, mode).unwrap();
            assert_eq!(normalized_total(&layers[0], 0.3).unwrap(), 1.0);
        }
    }

    #[test]
    fn scaled_matches_exact() {
        let f = BondField::bernoulli(0.6, 17, 2, 25).unwrap();
        let exact = count_paths(&f, 25, CountMode::Exact).unwrap();
        let scaled = count_paths(&f, 25, CountMode::Scaled).unwrap();
        for (e, s) in exact.iter().zip(&scaled) {
            let a = normalized_total(e, 0.6).unwrap();
            let b = normalized_total(s, 0.6).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "level {}: {a} vs {b}", e.level);
            assert_eq!(e.sites(), s.sites());
        }
    }

    #[test]
    fn rescaling_between_probabilities() {
        let f = BondField::bernoulli(0.5, 2, 1, 10).unwrap();
        let layer = count_paths(&f, 10, CountMode::Scaled).unwrap().pop().unwrap();
        let exact = count_paths(&f, 10, CountMode::Exact).unwrap().pop().unwrap();
        let a = normalized_total(&layer, 0.8).unwrap();
        let b = normalized_total(&exact, 0.8).unwrap();
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn scaled_mode_rejects_zero_probability() {
        let f = BondField::bernoulli(0.0, 2, 1, 10).unwrap();
        assert!(PathCounter::new(&f, CountMode::Scaled).is_err());
        let exact = count_paths(&f, 3, CountMode::Exact).unwrap();
        assert!(normalized_total(&exact[3], 0.0).is_err());
    }

    #[test]
    fn horizon_enforced() {
        let f = BondField::bernoulli(0.5, 2, 1, 4).unwrap();
        assert!(count_paths(&f, 5, CountMode::Exact).is_err());
        let mut c = PathCounter::new(&f, CountMode::Exact).unwrap();
        c.run_to(4).unwrap();
        assert!(c.step().is_err());
    }

    #[test]
    fn big_ratio_is_exact_on_equal_inputs() {
        let n = num_traits::pow(BigUint::from(3u32), 200);
        assert_eq!(big_ratio(&n, &n), 1.0);
        assert_eq!(big_ratio(&BigUint::from(1u32), &BigUint::from(4u32)), 0.25);
    }
}
