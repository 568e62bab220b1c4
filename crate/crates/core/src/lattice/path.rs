use std::fmt;

use super::field::PerturbationField;
use super::geometry::{Point, Site, MAX_DIM};
use crate::error::{invalid, Result};

/// An oriented nearest-neighbour path from the origin: every step adds a
/// standard basis vector, so the site after `k` steps has l1 norm `k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrientedPath {
    dim: usize,
    steps: Vec<u8>,
    sites: Vec<Site>,
}

impl OrientedPath {
    /// Builds a path from zero-based step axes.
    pub fn new(dim: usize, steps: &[usize]) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("dimension must lie in 1..={MAX_DIM}")));
        }
        let mut sites = Vec::with_capacity(steps.len() + 1);
        let mut z = Site::origin(dim);
        sites.push(z);
        for &axis in steps {
            if axis >= dim {
                return Err(invalid(format!("step axis {axis} out of range for dimension {dim}")));
            }
            z = z.step(axis);
            sites.push(z);
        }
        Ok(Self {
            dim,
            steps: steps.iter().map(|&a| a as u8).collect(),
            sites,
        })
    }

    /// The `index`-th path of length `len`, reading `index` as base-`dim`
    /// digits (first step is the most significant digit).
    pub fn from_index(dim: usize, len: usize, mut index: u64) -> Result<Self> {
        let mut steps = vec![0usize; len];
        for slot in steps.iter_mut().rev() {
            *slot = (index % dim as u64) as usize;
            index /= dim as u64;
        }
        if index != 0 {
            return Err(invalid("path index exceeds dim^len"));
        }
        Self::new(dim, &steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `t`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Axis of step `k` (from `z_k` to `z_{k+1}`).
    pub fn step_axis(&self, k: usize) -> usize {
        self.steps[k] as usize
    }

    pub fn steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&a| a as usize)
    }

    /// `z_0, ..., z_t`.
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn endpoint(&self) -> Site {
        *self.sites.last().expect("path always contains the origin")
    }

    /// Index `k` with `z_k == w`, if `w` lies on the path.
    pub fn position(&self, w: &Site) -> Option<usize> {
        if w.dim() != self.dim || !w.is_nonnegative() {
            return None;
        }
        let k = w.l1_norm() as usize;
        (k < self.sites.len() && self.sites[k] == *w).then_some(k)
    }

    pub fn contains(&self, w: &Site) -> bool {
        self.position(w).is_some()
    }
}

impl fmt::Debug for OrientedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrientedPath(d={}, steps={:?})", self.dim, self.steps)
    }
}

/// The path-shift map: `z_i -> z_{i+1}` for `i < t`, `z_t -> z_t`, and the
/// identity off the path.
pub fn shift_map(path: &OrientedPath, w: &Site) -> Site {
    match path.position(w) {
        Some(k) if k < path.len() => path.sites[k + 1],
        _ => *w,
    }
}

/// Sites whose image under [`shift_map`] is `w`.
///
/// The origin has no preimage once the path has a step; the endpoint has two.
pub fn shift_preimages(path: &OrientedPath, w: &Site) -> Vec<Site> {
    match path.position(w) {
        None => vec![*w],
        Some(0) if !path.is_empty() => vec![],
        Some(k) if k == path.len() && k > 0 => vec![path.sites[k - 1], *w],
        Some(0) => vec![*w],
        Some(k) => vec![path.sites[k - 1]],
    }
}

/// The shifted lattice: the point of site `z` is `X'_z + shift_map(z)`.
#[derive(Clone, Debug)]
pub struct ShiftedField {
    base: PerturbationField,
    path: OrientedPath,
}

impl ShiftedField {
    pub fn new(base: PerturbationField, path: OrientedPath) -> Result<Self> {
        Ok(Self { base, path })
    }

    pub fn base(&self) -> &PerturbationField {
        &self.base
    }

    pub fn path(&self) -> &OrientedPath {
        &self.path
    }

    /// Point emitted by site `z`.
    pub fn point(&self, z: &Site) -> Point {
        Point::translate(&shift_map(&self.path, z), &self.base.offset(z))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::lattice::field::FieldLabel;
    use crate::stats::{ks_two_sample, RandomStream};

    fn s(c: &[i64]) -> Site {
        Site::new(c).unwrap()
    }

    #[test]
    fn path_sites_are_oriented() {
        let p = OrientedPath::new(3, &[0, 2, 2, 1]).unwrap();
        assert_eq!(p.endpoint(), s(&[1, 1, 2]));
        for (k, z) in p.sites().iter().enumerate() {
            assert_eq!(z.l1_norm(), k as i64);
            assert_eq!(p.position(z), Some(k));
        }
        assert_eq!(p.position(&s(&[0, 1, 0])), None);
        assert!(OrientedPath::new(2, &[2]).is_err());
    }

    #[test]
    fn from_index_enumerates() {
        let p = OrientedPath::from_index(2, 3, 0b101).unwrap();
        assert_eq!(p.steps().collect::<Vec<_>>(), vec![1, 0, 1]);
        assert!(OrientedPath::from_index(2, 3, 8).is_err());
    }

    #[test]
    fn shift_map_examples() {
        let p = OrientedPath::new(2, &[0]).unwrap();
        assert_eq!(shift_map(&p, &s(&[0, 0])), s(&[1, 0]));
        assert_eq!(shift_map(&p, &s(&[1, 0])), s(&[1, 0]));
        assert_eq!(shift_map(&p, &s(&[0, 1])), s(&[0, 1]));
    }

    #[test]
    fn nothing_maps_to_origin() {
        let p = OrientedPath::new(2, &[1, 0, 0, 1]).unwrap();
        for a in -6..=6 {
            for b in -6..=6 {
                assert!(!shift_map(&p, &s(&[a, b])).is_origin());
            }
        }
    }

    #[test]
    fn image_is_box_minus_origin_with_doubled_endpoint() {
        let p = OrientedPath::new(3, &[2, 0, 0, 1, 2]).unwrap();
        let r = 6;
        let mut hits: BTreeMap<Site, usize> = BTreeMap::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    *hits.entry(shift_map(&p, &s(&[a, b, c]))).or_default() += 1;
                }
            }
        }
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let w = s(&[a, b, c]);
                    let expected = if w.is_origin() {
                        0
                    } else if w == p.endpoint() {
                        2
                    } else {
                        1
                    };
                    assert_eq!(hits.get(&w).copied().unwrap_or(0), expected, "{w:?}");
                    assert_eq!(shift_preimages(&p, &w).len(), expected, "{w:?}");
                    for z in shift_preimages(&p, &w) {
                        assert_eq!(shift_map(&p, &z), w);
                    }
                }
            }
        }
    }

    #[test]
    fn shifted_point_off_path_is_plain() {
        let base = PerturbationField::new(3, 1.0, FieldLabel::XPrime).unwrap();
        let p = OrientedPath::new(2, &[0, 1]).unwrap();
        let sf = ShiftedField::new(base, p).unwrap();
        let z = s(&[-2, 5]);
        assert_eq!(sf.point(&z), base.point(&z));
    }

    #[test]
    fn shifted_point_on_path_is_uniform_around_next_site() {
        // Resampling oracle: compare (point(z_{i-1}) - z_i) over many
        // independent base fields with fresh uniform draws.
        let p = OrientedPath::new(2, &[0, 1, 1]).unwrap();
        let l = 0.9;
        let n = 10_000u64;
        let fresh = RandomStream::with_label(77, "fresh-uniform");
        for i in 1..=p.len() {
            for axis in 0..2 {
                let shifted: Vec<f64> = (0..n)
                    .map(|k| {
                        let base = PerturbationField::for_trial(11, k, l, FieldLabel::XPrime).unwrap();
                        let sf = ShiftedField::new(base, p.clone()).unwrap();
                        sf.point(&p.sites()[i - 1]).get(axis) - p.sites()[i].get(axis) as f64
                    })
                    .collect();
                let reference: Vec<f64> = (0..n)
                    .map(|k| -l + 2.0 * l * fresh.unit(&[i as u64, axis as u64, k]))
                    .collect();
                let r = ks_two_sample(&shifted, &reference, 0.01).unwrap();
                assert!(r.pass, "step {i} axis {axis}: {r:?}");
            }
        }
    }

    #[test]
    fn same_law_as_origin_removed_lattice() {
        // Image-labelled points of the shifted lattice inside a window have
        // the per-site marginals of the lattice with the origin removed.
        let p = OrientedPath::new(2, &[0, 0, 1, 1, 0]).unwrap();
        let l = 1.0;
        let n = 10_000u64;
        let window: Vec<Site> = (-2..=2)
            .flat_map(|a| (-2..=2).map(move |b| s(&[a, b])))
            .filter(|w| !w.is_origin())
            .collect();
        for w in window.iter().filter(|w| p.contains(w) || w.l1_norm() <= 1) {
            let pre = shift_preimages(&p, w)[0];
            for axis in 0..2 {
                let shifted: Vec<f64> = (0..n)
                    .map(|k| {
                        let base = PerturbationField::for_trial(5, k, l, FieldLabel::XPrime).unwrap();
                        ShiftedField::new(base, p.clone()).unwrap().point(&pre).get(axis)
                    })
                    .collect();
                let origin_removed: Vec<f64> = (0..n)
                    .map(|k| {
                        PerturbationField::for_trial(6, k, l, FieldLabel::Y)
                            .unwrap()
                            .point_along(w, axis)
                    })
                    .collect();
                let r = ks_two_sample(&shifted, &origin_removed, 0.01).unwrap();
                assert!(r.pass, "site {w:?} axis {axis}: {r:?}");
            }
        }
    }
}
