use std::collections::BTreeSet;

use rustc_hash::FxHashSet;

use super::bond::{BondField, BondModel, TimeSpacePoint};
use crate::error::{invalid, Error, Result};
use crate::lattice::Site;

/// Points reachable from `origin` through open bonds, grouped by level
/// `origin.t ..= horizon`. Entry `k` holds the sites at level `origin.t + k`.
pub fn grow_cluster(field: &BondField, origin: TimeSpacePoint, horizon: u64) -> Result<Vec<BTreeSet<Site>>> {
    if origin.z.dim() != field.spatial_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.spatial_dim(),
            got: origin.z.dim(),
        });
    }
    if horizon < origin.t {
        return Err(invalid(format!(
            "horizon {horizon} is below the origin level {}",
            origin.t
        )));
    }
    if horizon > field.horizon() {
        return Err(invalid(format!(
            "horizon {horizon} exceeds field horizon {}",
            field.horizon()
        )));
    }
    if matches!(field.model(), BondModel::Coupled { .. }) && origin.z.l1_norm() as u64 > origin.t {
        return Err(invalid(format!(
            "{origin:?} lies outside the embeddable cone |z| <= t"
        )));
    }
    let mut levels = vec![BTreeSet::from([origin.z])];
    for t in origin.t + 1..=horizon {
        let mut next = BTreeSet::new();
        for z in levels.last().expect("nonempty") {
            for dir in 0..field.out_degree() {
                if field.open_dir(t, z, dir) {
                    next.insert(if dir == 0 { *z } else { z.step(dir - 1) });
                }
            }
        }
        levels.push(next);
    }
    Ok(levels)
}

/// Whether an open path from the origin reaches level `horizon`.
///
/// Depth-first with a visited set: a supercritical cluster is usually
/// answered after about `horizon` bond queries, a subcritical one after
/// exploring its (small) cluster.
pub fn survives(field: &BondField, horizon: u64) -> bool {
    debug_assert!(horizon <= field.horizon());
    if horizon == 0 {
        return true;
    }
    let ndirs = field.out_degree();
    let mut visited: FxHashSet<(u64, Site)> = FxHashSet::default();
    let mut stack: Vec<(u64, Site)> = vec![(0, Site::origin(field.spatial_dim()))];
    while let Some((t, z)) = stack.pop() {
        let t1 = t + 1;
        // Push in reverse so that the stay move is explored first.
        for dir in (0..ndirs).rev() {
            if !field.open_dir(t1, &z, dir) {
                continue;
            }
            if t1 == horizon {
                return true;
            }
            let w = if dir == 0 { z } else { z.step(dir - 1) };
            if visited.insert((t1, w)) {
                stack.push((t1, w));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gobp::count::{count_paths, CountMode};

    fn s(c: &[i64]) -> Site {
        Site::new(c).unwrap()
    }

    #[test]
    fn full_cone() {
        let f = BondField::bernoulli(1.0, 0, 1, 2).unwrap();
        let c = grow_cluster(&f, TimeSpacePoint::origin(1), 2).unwrap();
        assert_eq!(c[2], BTreeSet::from([s(&[0]), s(&[1]), s(&[2])]));
        assert!(survives(&f, 2));
    }

    #[test]
    fn closed_field() {
        let f = BondField::bernoulli(0.0, 0, 2, 5).unwrap();
        let c = grow_cluster(&f, TimeSpacePoint::origin(2), 5).unwrap();
        assert!(c[1].is_empty());
        assert!(c[5].is_empty());
        assert!(!survives(&f, 5));
        assert!(survives(&f, 0));
    }

    #[test]
    fn cluster_matches_positive_counts() {
        for seed in 0..50 {
            let f = BondField::bernoulli(0.55, seed, 2, 12).unwrap();
            let c = grow_cluster(&f, TimeSpacePoint::origin(2), 12).unwrap();
            let layers = count_paths(&f, 12, CountMode::Exact).unwrap();
            for (t, layer) in layers.iter().enumerate() {
                let sites: BTreeSet<Site> = layer.sites().into_iter().collect();
                assert_eq!(sites, c[t], "seed {seed} level {t}");
            }
            assert_eq!(survives(&f, 12), !c[12].is_empty());
        }
    }

    #[test]
    fn empty_level_stays_empty() {
        for seed in 0..50 {
            let f = BondField::bernoulli(0.4, seed, 1, 30).unwrap();
            let c = grow_cluster(&f, TimeSpacePoint::origin(1), 30).unwrap();
            if let Some(k) = c.iter().position(|l| l.is_empty()) {
                assert!(c[k..].iter().all(|l| l.is_empty()));
            }
        }
    }

    #[test]
    fn shifted_origin() {
        let f = BondField::bernoulli(1.0, 0, 1, 5).unwrap();
        let origin = TimeSpacePoint::new(3, s(&[2])).unwrap();
        let c = grow_cluster(&f, origin, 5).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[2], BTreeSet::from([s(&[2]), s(&[3]), s(&[4])]));
        assert!(grow_cluster(&f, origin, 2).is_err());
        assert!(grow_cluster(&f, origin, 6).is_err());
    }
}
