use serde::{Deserialize, Serialize};

use crate::coupling::CoupledBondRealization;
use crate::error::{invalid, Error, Result};
use crate::lattice::{j_box, AxisBox, OrientedPath, PerturbationField, Site};

/// Default cap on `d^t` for exhaustive path enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// `d^t`, or `None` on overflow.
pub fn path_count(dim: usize, len: usize) -> Option<u64> {
    (dim as u64).checked_pow(u32::try_from(len).ok()?)
}

pub(crate) fn check_budget(dim: usize, len: usize, budget: u64) -> Result<u64> {
    match path_count(dim, len) {
        Some(n) if n <= budget => Ok(n),
        _ => Err(Error::BudgetExceeded(format!(
            "{dim}^{len} oriented paths exceed the enumeration budget of {budget}; \
             lower t or switch to sampling mode"
        ))),
    }
}

/// All `d^t` oriented paths of length `t` from the origin, in index order.
pub fn enumerate_paths(dim: usize, len: usize, budget: u64) -> Result<Vec<OrientedPath>> {
    let n = check_budget(dim, len, budget)?;
    (0..n).map(|i| OrientedPath::from_index(dim, len, i)).collect()
}

/// Whether every bond of `path` is open under the coupled rule built from
/// `x` (departure) and `y` (arrival).
pub fn path_open_indicator(x: &PerturbationField, y: &PerturbationField, path: &OrientedPath) -> Result<bool> {
    if path.is_empty() {
        return Err(invalid("path must have at least one step"));
    }
    let r = CoupledBondRealization::new(*x, *y)?;
    Ok(r.walk_open(path.sites()))
}

/// Number of open oriented paths of length `len` from the origin.
///
/// Depth-first over open bonds only, which visits exactly the open prefixes
/// of the `d^len` paths.
pub fn count_open_paths(r: &CoupledBondRealization, dim: usize, len: usize) -> u64 {
    fn go(r: &CoupledBondRealization, z: Site, left: usize, dim: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        (0..dim)
            .filter(|&a| r.open_along(&z, a))
            .map(|a| go(r, z.step(a), left - 1, dim))
            .sum()
    }
    go(r, Site::origin(dim), len, dim)
}

/// Which family of boxes a path induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSide {
    /// Boxes on departure points: `J(z_k) ∩ J(z_{k+1})` at `z_k`, `k < t`.
    Departure,
    /// Boxes on arrival points: `J(z_k) ∩ J(z_{k+1})` at `z_{k+1}`.
    Arrival,
}

/// Per-site boxes that the points of an open path must occupy.
#[derive(Clone, Debug)]
pub struct PathBoxSystem {
    path: OrientedPath,
    side: BoxSide,
    amplitude: f64,
}

impl PathBoxSystem {
    pub fn new(path: OrientedPath, side: BoxSide, amplitude: f64) -> Result<Self> {
        j_box(&Site::origin(path.dim()), amplitude)?;
        Ok(Self { path, side, amplitude })
    }

    pub fn path(&self) -> &OrientedPath {
        &self.path
    }

    pub fn side(&self) -> BoxSide {
        self.side
    }

    /// Box assigned to `z`; `J(z)` off the path and at the free end.
    pub fn box_at(&self, z: &Site) -> AxisBox {
        let l = self.amplitude;
        let own = AxisBox::cube(z, l);
        let sites = self.path.sites();
        match (self.path.position(z), self.side) {
            (Some(k), BoxSide::Departure) if k < self.path.len() => own.intersect(&AxisBox::cube(&sites[k + 1], l)),
            (Some(k), BoxSide::Arrival) if k > 0 => own.intersect(&AxisBox::cube(&sites[k - 1], l)),
            _ => own,
        }
    }

    /// The constrained sites: `z_0..z_{t-1}` on the departure side,
    /// `z_1..z_t` on the arrival side.
    pub fn constrained_sites(&self) -> &[Site] {
        let s = self.path.sites();
        match self.side {
            BoxSide::Departure => &s[..s.len() - 1],
            BoxSide::Arrival => &s[1..],
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::lattice::FieldLabel;
    use crate::stats::wilson_interval;

    #[test]
    fn enumeration_cardinality() {
        assert_eq!(enumerate_paths(2, 2, 100).unwrap().len(), 4);
        assert_eq!(enumerate_paths(1, 9, 100).unwrap().len(), 1);
        let p = enumerate_paths(3, 3, 100).unwrap();
        assert_eq!(p.len(), 27);
        assert!(p.iter().all(|g| g.endpoint().l1_norm() == 3 && g.sites()[0].is_origin()));
        assert_eq!(p.iter().collect::<HashSet<_>>().len(), 27);
        assert!(matches!(enumerate_paths(2, 21, DEFAULT_ENUMERATION_BUDGET), Err(Error::BudgetExceeded(_))));
        assert!(matches!(enumerate_paths(4, 100, u64::MAX), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn box_systems_are_pairwise_intersections() {
        let l = 0.8;
        for g in enumerate_paths(3, 4, 100).unwrap() {
            let a = PathBoxSystem::new(g.clone(), BoxSide::Departure, l).unwrap();
            let b = PathBoxSystem::new(g.clone(), BoxSide::Arrival, l).unwrap();
            let s = g.sites();
            for k in 0..g.len() {
                let axis = g.step_axis(k);
                let mut low = Vec::new();
                let mut high = Vec::new();
                for i in 0..3 {
                    let c = s[k].get(i) as f64;
                    if i == axis {
                        low.push(c + 1.0 - l);
                        high.push(c + l);
                    } else {
                        low.push(c - l);
                        high.push(c + l);
                    }
                }
                let expected = AxisBox::new(&low, &high).unwrap();
                assert_eq!(a.box_at(&s[k]), expected);
                assert_eq!(b.box_at(&s[k + 1]), expected);
            }
            assert_eq!(a.box_at(&g.endpoint()), AxisBox::cube(&g.endpoint(), l));
            assert_eq!(b.box_at(&s[0]), AxisBox::cube(&s[0], l));
            let off = Site::new(&[-1, 2, 0]).unwrap();
            assert_eq!(a.box_at(&off), AxisBox::cube(&off, l));
            assert_eq!(a.constrained_sites().len(), 4);
            assert_eq!(b.constrained_sites()[0], s[1]);
        }
    }

    fn open_frequency(path: &OrientedPath, l: f64, n: u64) -> u64 {
        (0..n)
            .filter(|&i| {
                let x = PerturbationField::for_trial(5, i, l, FieldLabel::X).unwrap();
                let y = PerturbationField::for_trial(5, i, l, FieldLabel::Y).unwrap();
                path_open_indicator(&x, &y, path).unwrap()
            })
            .count() as u64
    }

    #[test]
    fn open_indicator_follows_product_law() {
        let n = 100_000;
        let one = OrientedPath::new(2, &[1]).unwrap();
        let k = open_frequency(&one, 1.0, n);
        assert!(wilson_interval(k, n, 0.997).unwrap().contains(0.25), "{k}");
        let three = OrientedPath::new(2, &[0, 1, 1]).unwrap();
        let l = 2.0;
        let k = open_frequency(&three, l, n);
        let target = crate::coupling::p_hat(l).unwrap().powi(3);
        assert!(wilson_interval(k, n, 0.997).unwrap().contains(target), "{k} vs {target}");
        assert_eq!(open_frequency(&three, 0.45, 1000), 0);
    }

    #[test]
    fn open_indicator_rejects_empty_path() {
        let x = PerturbationField::new(1, 1.0, FieldLabel::X).unwrap();
        let y = PerturbationField::new(1, 1.0, FieldLabel::Y).unwrap();
        assert!(path_open_indicator(&x, &y, &OrientedPath::new(2, &[]).unwrap()).is_err());
    }

    #[test]
    fn open_path_count_matches_enumeration() {
        for trial in 0..200 {
            let r = CoupledBondRealization::for_trial(3, trial, 1.5).unwrap();
            for (d, t) in [(2, 5), (3, 3)] {
                let brute = enumerate_paths(d, t, 1000)
                    .unwrap()
                    .iter()
                    .filter(|g| r.walk_open(g.sites()))
                    .count() as u64;
                assert_eq!(count_open_paths(&r, d, t), brute);
            }
        }
    }
}
