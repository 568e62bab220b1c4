//! Read-only views of the three point configurations that the estimators
//! compare, and membership of a configuration in a cylinder event.

use super::event::{CylinderEvent, Semantics};
use crate::lattice::{shift_preimages, AxisBox, PerturbationField, Point, ShiftedField, Site};

/// A lattice configuration: every site `z` carries one point near `z`.
#[derive(Clone, Copy, Debug)]
pub enum Configuration<'a> {
    /// `Z(X)`: the point of `z` is `z + X_z`.
    Full(&'a PerturbationField),
    /// `Z_0(Y)`: as `Full` for `Y`, with the origin carrying no point.
    OriginRemoved(&'a PerturbationField),
    /// `Z_γ(X')`: the point of `z` is `γ(z) + X'_z`.
    Shifted(&'a ShiftedField),
}

impl Configuration<'_> {
    fn amplitude(&self) -> f64 {
        match self {
            Configuration::Full(f) | Configuration::OriginRemoved(f) => f.amplitude(),
            Configuration::Shifted(s) => s.base().amplitude(),
        }
    }

    /// Point carried by site `z`, if any.
    pub fn point_of(&self, z: &Site) -> Option<Point> {
        match self {
            Configuration::Full(f) => Some(f.point(z)),
            Configuration::OriginRemoved(f) => (!z.is_origin()).then(|| f.point(z)),
            Configuration::Shifted(s) => Some(s.point(z)),
        }
    }

    /// Sites whose point lies in `region`, each listed once.
    pub fn sites_in(&self, region: &AxisBox) -> Vec<Site> {
        let mut out = Vec::new();
        for w in sites_meeting(region, self.amplitude()) {
            match self {
                Configuration::Shifted(s) => {
                    for src in shift_preimages(s.path(), &w) {
                        if region.contains(&Point::translate(&w, &s.base().offset(&src))) {
                            out.push(src);
                        }
                    }
                }
                _ => {
                    if self.point_of(&w).is_some_and(|p| region.contains(&p)) {
                        out.push(w);
                    }
                }
            }
        }
        out
    }

    /// Whether the configuration belongs to `event`.
    pub fn satisfies(&self, event: &CylinderEvent) -> bool {
        let cs = event.constraints();
        match event.semantics() {
            Semantics::Labeled => cs
                .iter()
                .all(|c| self.point_of(&c.site).is_some_and(|p| c.region.contains(&p))),
            Semantics::Projected => {
                let mut candidates = Vec::with_capacity(cs.len());
                for c in cs {
                    let s = self.sites_in(&c.region);
                    if s.is_empty() {
                        return false;
                    }
                    candidates.push(s);
                }
                has_perfect_matching(&candidates)
            }
        }
    }
}

/// Sites `z` with `J(z) = z + [-L, L]^d` meeting `region`.
pub fn sites_meeting(region: &AxisBox, amplitude: f64) -> Vec<Site> {
    if region.is_empty() {
        return Vec::new();
    }
    let d = region.dim();
    let lo: Vec<i64> = region.low().iter().map(|&a| (a - amplitude).ceil() as i64).collect();
    let hi: Vec<i64> = region.high().iter().map(|&b| (b + amplitude).floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        out.push(Site::new(&cur).expect("dimension checked by the box"));
        let mut i = 0;
        while i < d {
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
        if i == d {
            return out;
        }
    }
}

/// Whether every constraint can be served by its own distinct site
/// (augmenting paths on the bipartite constraint/site graph).
fn has_perfect_matching(candidates: &[Vec<Site>]) -> bool {
    fn augment(j: usize, candidates: &[Vec<Site>], owner: &mut Vec<(Site, usize)>, seen: &mut Vec<Site>) -> bool {
        for s in &candidates[j] {
            if seen.contains(s) {
                continue;
            }
            seen.push(*s);
            match owner.iter().position(|(o, _)| o == s) {
                None => {
                    owner.push((*s, j));
                    return true;
                }
                Some(i) => {
                    let k = owner[i].1;
                    if augment(k, candidates, owner, seen) {
                        owner[i].1 = j;
                        return true;
                    }
                }
            }
        }
        false
    }
    let mut owner = Vec::new();
    (0..candidates.len()).all(|j| augment(j, candidates, &mut owner, &mut Vec::new()))
}
