use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::{CylinderEvent, Semantics};
use super::paths::{check_budget, count_open_paths, BoxSide, PathBoxSystem, DEFAULT_ENUMERATION_BUDGET};
use super::view::Configuration;
use crate::coupling::{p_hat, CoupledBondRealization, Embedding};
use crate::error::{invalid, Error, Result};
use crate::lattice::{FieldLabel, OrientedPath, PerturbationField, ShiftedField, Site};
use crate::stats::{MeanEstimate, RandomStream};

/// Default number of standard errors tolerated between compared estimates.
pub const COMPARISON_SIGMAS: f64 = 3.0;

/// Which restricted measure is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSide {
    /// `ν̂_t`: the full lattice `Z(X)`.
    X,
    /// `ν̂_{0,t}`: the lattice `Z_0(Y)` with the origin removed.
    Y,
}

impl MeasureSide {
    fn stream_label(self) -> &'static str {
        match self {
            MeasureSide::X => "measures/x-side",
            MeasureSide::Y => "measures/y-side",
        }
    }
}

/// How the sum over oriented paths is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSumMode {
    /// Every open path is counted; requires `d^t <= budget`.
    Enumerate { budget: u64 },
    /// `paths` uniformly drawn paths per trial, reweighted by `d^t / paths`.
    Sample { paths: u64 },
}

impl Default for PathSumMode {
    fn default() -> Self {
        PathSumMode::Enumerate {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub t: usize,
    pub side: MeasureSide,
    pub amplitude: f64,
    pub mode: PathSumMode,
    pub event: CylinderEvent,
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Outcome of comparing two independent estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub difference: f64,
    pub pooled_se: f64,
    pub pass: bool,
}

impl Comparison {
    /// Passes when `|a - b| < k * sqrt(se_a^2 + se_b^2)`; two zero-variance
    /// estimates must agree exactly.
    pub fn new(a: f64, se_a: f64, b: f64, se_b: f64, sigmas: f64) -> Self {
        let difference = a - b;
        let pooled_se = se_a.hypot(se_b);
        let pass = if pooled_se == 0.0 {
            difference == 0.0
        } else {
            difference.abs() < sigmas * pooled_se
        };
        Self {
            difference,
            pooled_se,
            pass,
        }
    }
}

fn check_common(t: usize, event: &CylinderEvent, amplitude: f64, trials: u64) -> Result<f64> {
    let d = event.dim();
    // The lattice Z^d is the embedded time-space of GOBP with d* = d - 1, so
    // (d p̂)^t is the GOBP normalization ((d* + 1) p)^t.
    let emb = Embedding::for_spatial(d.saturating_sub(1))?;
    assert_eq!(emb.dim(), emb.spatial_dim() + 1);
    if t == 0 {
        return Err(invalid("level t must be at least 1"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let ph = p_hat(amplitude)?;
    if ph == 0.0 {
        return Err(invalid(format!("p̂({amplitude}) = 0: the measures are undefined below L = 1/2")));
    }
    event.validate_for(amplitude)?;
    Ok(ph)
}

fn side_seed(seed: u64, label: &str) -> u64 {
    RandomStream::with_label(seed, label).derive(0)
}

/// Monte Carlo estimate of `ν̂_t(Λ)` (X side) or `ν̂_{0,t}(Λ)` (Y side).
///
/// Trial `i` draws `X, Y`, checks the configuration of the requested side
/// against the event and, if it holds, adds the number of open oriented
/// paths of length `t`, normalized by `(d p̂)^t`. Membership of the points in
/// the path boxes is implied by the path being open.
pub fn estimate_nu(
    t: usize,
    event: &CylinderEvent,
    side: MeasureSide,
    amplitude: f64,
    trials: u64,
    seed: u64,
    mode: PathSumMode,
) -> Result<MeasureEstimate> {
    let ph = check_common(t, event, amplitude, trials)?;
    let d = event.dim();
    if side == MeasureSide::Y && event.semantics() == Semantics::Labeled {
        if let Some(c) = event.constraints().iter().find(|c| c.site.is_origin()) {
            return Err(invalid(format!(
                "site {:?} is constrained but Z_0(Y) carries no point at the origin",
                c.site
            )));
        }
    }
    let weight = match mode {
        PathSumMode::Enumerate { budget } => {
            check_budget(d, t, budget)?;
            1.0 / (d as f64 * ph).powi(t as i32)
        }
        PathSumMode::Sample { paths } => {
            if paths == 0 {
                return Err(invalid("sampling mode needs at least one path per trial"));
            }
            1.0 / (paths as f64 * ph.powi(t as i32))
        }
    };
    let master = side_seed(seed, side.stream_label());
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let r = CoupledBondRealization::for_trial(master, i, amplitude).expect("amplitude validated");
            let cfg = match side {
                MeasureSide::X => Configuration::Full(r.x_field()),
                MeasureSide::Y => Configuration::OriginRemoved(r.y_field()),
            };
            if event.has_empty_box() || !cfg.satisfies(event) {
                return 0.0;
            }
            let open = match mode {
                PathSumMode::Enumerate { .. } => count_open_paths(&r, d, t),
                PathSumMode::Sample { paths } => sampled_open_paths(&r, d, t, paths, master, i),
            };
            open as f64 * weight
        })
        .collect();
    let m = MeanEstimate::from_values(&values);
    Ok(MeasureEstimate {
        t,
        side,
        amplitude,
        mode,
        event: event.clone(),
        value: m.mean,
        std_error: m.std_error,
        trials,
    })
}

fn sampled_open_paths(r: &CoupledBondRealization, d: usize, t: usize, paths: u64, master: u64, trial: u64) -> u64 {
    let stream = RandomStream::new(master, crate::stats::namespace("measures/path-sample"));
    (0..paths)
        .filter(|&k| {
            let mut z = Site::origin(d);
            (0..t).all(|step| {
                let axis = (stream.word(&[trial, k, step as u64]) % d as u64) as usize;
                let open = r.open_along(&z, axis);
                z = z.step(axis);
                open
            })
        })
        .count() as u64
}

fn check_endpoint(endpoint_reach: f64, t: usize, d: usize, amplitude: f64, window: f64) -> Result<()> {
    let inflated = amplitude + window;
    if endpoint_reach <= inflated {
        return Err(Error::Precondition(format!(
            "an endpoint at level t = {t} lies inside [-(L+M), L+M]^{d}: \
             max |z_i| = {endpoint_reach} <= L + M = {inflated}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub x_side: MeasureEstimate,
    pub y_side: MeasureEstimate,
    pub comparison: Comparison,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.comparison.pass
    }
}

/// Estimates both restricted measures on independent draws and compares
/// them at [`COMPARISON_SIGMAS`] pooled standard errors.
///
/// Requires every level-`t` endpoint to lie outside `[-(L+M), L+M]^d`; the
/// closest endpoint has sup-norm `ceil(t/d)`.
pub fn check_lemma_first(
    t: usize,
    event: &CylinderEvent,
    amplitude: f64,
    trials: u64,
    seed: u64,
    mode: PathSumMode,
) -> Result<LemmaReport> {
    check_common(t, event, amplitude, trials)?;
    let d = event.dim();
    check_endpoint(t.div_ceil(d) as f64, t, d, amplitude, event.window())?;
    let x_side = estimate_nu(t, event, MeasureSide::X, amplitude, trials, seed, mode)?;
    let y_side = estimate_nu(t, event, MeasureSide::Y, amplitude, trials, seed, mode)?;
    let comparison = Comparison::new(x_side.value, x_side.std_error, y_side.value, y_side.std_error, COMPARISON_SIGMAS);
    Ok(LemmaReport {
        x_side,
        y_side,
        comparison,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NkeyReport {
    pub steps: Vec<usize>,
    pub amplitude: f64,
    pub trials: u64,
    /// `P(Z(X) ∈ Λ, path open)`.
    pub x_side: MeanEstimate,
    /// Same probability read off the shifted lattice `Z_γ(X')`.
    pub shifted: MeanEstimate,
    /// `P(Z_0(Y) ∈ Λ, path open)`.
    pub y_side: MeanEstimate,
    pub x_vs_shifted: Comparison,
    pub shifted_vs_y: Comparison,
    pub x_vs_y: Comparison,
}

impl NkeyReport {
    pub fn pass(&self) -> bool {
        self.x_vs_shifted.pass && self.shifted_vs_y.pass && self.x_vs_y.pass
    }
}

/// Per-path check of `P(Z(X) ∈ Λ ∩ C_γ) = P(Z_0(Y) ∈ Λ ∩ C̄_γ)`, with the
/// left side also estimated through the shifted lattice.
///
/// On the shifted side the departure conditions of the path are read off
/// `Z_γ(X')` through the departure boxes (the point of `z_k` is
/// `X'_{z_k} + z_{k+1}`); the arrival conditions use an independent `Y`.
pub fn check_nkey(path: &OrientedPath, event: &CylinderEvent, amplitude: f64, trials: u64, seed: u64) -> Result<NkeyReport> {
    let d = event.dim();
    if path.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: path.dim(),
        });
    }
    check_common(path.len().max(1), event, amplitude, trials)?;
    if path.is_empty() {
        return Err(invalid("path must have at least one step"));
    }
    if event.semantics() == Semantics::Labeled && event.constraints().iter().any(|c| c.site.is_origin()) {
        return Err(invalid("Z_0(Y) carries no point at the origin"));
    }
    check_endpoint(path.endpoint().max_abs() as f64, path.len(), d, amplitude, event.window())?;

    let departure = PathBoxSystem::new(path.clone(), BoxSide::Departure, amplitude)?;
    let arrival = PathBoxSystem::new(path.clone(), BoxSide::Arrival, amplitude)?;
    let run = |label: &str, f: &(dyn Fn(u64, u64) -> bool + Sync)| -> MeanEstimate {
        let master = side_seed(seed, label);
        let v: Vec<f64> = (0..trials).into_par_iter().map(|i| f(master, i) as u8 as f64).collect();
        MeanEstimate::from_values(&v)
    };
    let empty = event.has_empty_box();

    let x_side = run("measures/nkey/x", &|master, i| {
        let r = CoupledBondRealization::for_trial(master, i, amplitude).expect("validated");
        !empty && r.walk_open(path.sites()) && Configuration::Full(r.x_field()).satisfies(event)
    });
    let shifted = run("measures/nkey/shifted", &|master, i| {
        let base = PerturbationField::for_trial(master, i, amplitude, FieldLabel::XPrime).expect("validated");
        let y = PerturbationField::for_trial(master, i, amplitude, FieldLabel::Y).expect("validated");
        let sf = ShiftedField::new(base, path.clone()).expect("validated");
        !empty
            && departure
                .constrained_sites()
                .iter()
                .all(|z| departure.box_at(z).contains(&sf.point(z)))
            && arrival
                .constrained_sites()
                .iter()
                .all(|z| arrival.box_at(z).contains(&y.point(z)))
            && Configuration::Shifted(&sf).satisfies(event)
    });
    let y_side = run("measures/nkey/y", &|master, i| {
        let r = CoupledBondRealization::for_trial(master, i, amplitude).expect("validated");
        !empty && r.walk_open(path.sites()) && Configuration::OriginRemoved(r.y_field()).satisfies(event)
    });
    let cmp = |a: &MeanEstimate, b: &MeanEstimate| Comparison::new(a.mean, a.std_error, b.mean, b.std_error, COMPARISON_SIGMAS);
    Ok(NkeyReport {
        steps: path.steps().collect(),
        amplitude,
        trials,
        x_vs_shifted: cmp(&x_side, &shifted),
        shifted_vs_y: cmp(&shifted, &y_side),
        x_vs_y: cmp(&x_side, &y_side),
        x_side,
        shifted,
        y_side,
    })
}
