use serde::Serialize;

use super::estimate::{check_lemma_first, check_nkey, LemmaReport, NkeyReport, PathSumMode};
use super::event::{Constraint, CylinderEvent, Semantics};
use crate::error::Result;
use crate::lattice::{AxisBox, OrientedPath, Site};
use crate::stats::{unit_from_word, RandomStream};

/// Dimension, level and amplitude of the bundled battery.
pub const BATTERY_DIM: usize = 2;
pub const BATTERY_LEVEL: usize = 5;
pub const BATTERY_AMPLITUDE: f64 = 1.0;
pub const BATTERY_SIZE: usize = 20;
const BATTERY_SEED: u64 = 0x5EED_BA77;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryEntry {
    pub id: usize,
    pub t: usize,
    pub amplitude: f64,
    pub event: CylinderEvent,
}

/// Random projected events at `d = 2`, `t = 5`, `L = 1`.
///
/// Windows have `M ∈ {0.5, 1, 1.5}`, so every level-5 endpoint (sup-norm at
/// least 3) stays outside `[-(L+M), L+M]^2`. Each event carries one to three
/// boxes inside the window with sides between 0.3 and 1.
pub fn default_battery() -> Vec<BatteryEntry> {
    let rng = RandomStream::with_label(BATTERY_SEED, "measures/battery");
    let u = |key: &[u64]| unit_from_word(rng.word(key));
    (0..BATTERY_SIZE)
        .map(|id| {
            let i = id as u64;
            let window = [0.5, 1.0, 1.5][(rng.word(&[i, 0]) % 3) as usize];
            let boxes = 1 + rng.word(&[i, 1]) % 3;
            let constraints = (0..boxes)
                .map(|k| {
                    let mut low = [0.0; BATTERY_DIM];
                    let mut high = [0.0; BATTERY_DIM];
                    let mut site = [0i64; BATTERY_DIM];
                    for a in 0..BATTERY_DIM {
                        let key = 10 + 10 * k + 2 * a as u64;
                        let side = (0.3 + 0.7 * u(&[i, key])).min(2.0 * window);
                        let lo = -window + (2.0 * window - side) * u(&[i, key + 1]);
                        low[a] = lo;
                        high[a] = lo + side;
                        site[a] = (lo + 0.5 * side).round() as i64;
                    }
                    Constraint {
                        site: Site::new(&site).expect("fixed dimension"),
                        region: AxisBox::new(&low, &high).expect("finite bounds"),
                    }
                })
                .collect();
            BatteryEntry {
                id,
                t: BATTERY_LEVEL,
                amplitude: BATTERY_AMPLITUDE,
                event: CylinderEvent::new(BATTERY_DIM, window, Semantics::Projected, constraints)
                    .expect("boxes generated inside the window"),
            }
        })
        .collect()
}

/// `count` oriented paths of length `t` in `Z^d`, drawn uniformly.
pub fn random_paths(dim: usize, t: usize, count: usize, seed: u64) -> Vec<OrientedPath> {
    let rng = RandomStream::with_label(seed, "measures/random-paths");
    (0..count as u64)
        .map(|k| {
            let steps: Vec<usize> = (0..t as u64).map(|s| (rng.word(&[k, s]) % dim as u64) as usize).collect();
            OrientedPath::new(dim, &steps).expect("axes below dim")
        })
        .collect()
}

/// Minimum number of passing entries out of `n` for the battery to pass:
/// one false alarm per twenty comparisons is tolerated.
pub fn required_passes(n: usize) -> usize {
    n - n / 20
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaBatteryReport {
    pub entries: Vec<BatteryEntry>,
    pub reports: Vec<LemmaReport>,
    pub passed: usize,
    pub required: usize,
}

impl LemmaBatteryReport {
    pub fn pass(&self) -> bool {
        self.passed >= self.required
    }
}

pub fn run_lemma_battery(entries: &[BatteryEntry], trials: u64, seed: u64, mode: PathSumMode) -> Result<LemmaBatteryReport> {
    let reports = entries
        .iter()
        .map(|e| check_lemma_first(e.t, &e.event, e.amplitude, trials, seed.wrapping_add(e.id as u64), mode))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().filter(|r| r.pass()).count();
    Ok(LemmaBatteryReport {
        entries: entries.to_vec(),
        required: required_passes(reports.len()),
        reports,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NkeyBatteryReport {
    pub reports: Vec<NkeyReport>,
    pub passed: usize,
}

impl NkeyBatteryReport {
    pub fn pass(&self) -> bool {
        self.passed == self.reports.len()
    }
}

/// Runs the three-way per-path check on `paths` random paths, pairing path
/// `k` with battery event `k` (cyclically).
pub fn run_nkey_battery(entries: &[BatteryEntry], paths: usize, trials: u64, seed: u64) -> Result<NkeyBatteryReport> {
    let mut reports = Vec::with_capacity(paths);
    if !entries.is_empty() {
        let t = entries[0].t;
        for (k, path) in random_paths(entries[0].event.dim(), t, paths, seed).iter().enumerate() {
            let e = &entries[k % entries.len()];
            reports.push(check_nkey(path, &e.event, e.amplitude, trials, seed.wrapping_add(k as u64))?);
        }
    }
    let passed = reports.iter().filter(|r| r.pass()).count();
    Ok(NkeyBatteryReport { reports, passed })
}
