use crate::error::{invalid, Error, Result};
use crate::lattice::{j_box, FieldLabel, PerturbationField, Site};

/// Effective bond probability `(1 - 1/(2L))^2`, zero below `L = 1/2`.
pub fn p_hat(amplitude: f64) -> Result<f64> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(invalid(format!(
            "amplitude must be positive and finite, got {amplitude}"
        )));
    }
    if amplitude < 0.5 {
        return Ok(0.0);
    }
    let q = 1.0 - 1.0 / (2.0 * amplitude);
    Ok(q * q)
}

/// Two independent perturbation fields and the box-overlap rule that decides
/// which bonds of `Z^d` are open.
///
/// A bond `<z, z + e_i>` is open iff the departure point `z + X_z` and the
/// arrival point `z + e_i + Y_{z+e_i}` both lie in `J(z) ∩ J(z + e_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledBondRealization {
    x: PerturbationField,
    y: PerturbationField,
    amplitude: f64,
}

impl CoupledBondRealization {
    pub fn new(x: PerturbationField, y: PerturbationField) -> Result<Self> {
        if x.amplitude() != y.amplitude() {
            return Err(invalid(format!(
                "departure and arrival fields disagree on amplitude: {} vs {}",
                x.amplitude(),
                y.amplitude()
            )));
        }
        if x.label() == y.label() && x.seed() == y.seed() {
            return Err(invalid("departure and arrival fields must be independent"));
        }
        Ok(Self {
            x,
            y,
            amplitude: x.amplitude(),
        })
    }

    /// The `X`/`Y` pair of Monte Carlo trial `trial`.
    pub fn for_trial(master_seed: u64, trial: u64, amplitude: f64) -> Result<Self> {
        Self::new(
            PerturbationField::for_trial(master_seed, trial, amplitude, FieldLabel::X)?,
            PerturbationField::for_trial(master_seed, trial, amplitude, FieldLabel::Y)?,
        )
    }

    pub fn x_field(&self) -> &PerturbationField {
        &self.x
    }

    pub fn y_field(&self) -> &PerturbationField {
        &self.y
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Checks the rule literally: builds both boxes, intersects them and tests
    /// the two perturbed points for membership.
    pub fn bond_open(&self, z_prev: &Site, w_next: &Site) -> Result<bool> {
        if z_prev.dim() != w_next.dim() {
            return Err(Error::DimensionMismatch {
                expected: z_prev.dim(),
                got: w_next.dim(),
            });
        }
        if z_prev.unit_step_to(w_next).is_none() {
            return Err(Error::MalformedBond(format!(
                "{w_next:?} is not {z_prev:?} plus a standard basis vector"
            )));
        }
        let overlap = j_box(z_prev, self.amplitude)?.intersect(&j_box(w_next, self.amplitude)?);
        Ok(overlap.contains(&self.x.point(z_prev)) && overlap.contains(&self.y.point(w_next)))
    }

    /// Fast form of [`bond_open`](Self::bond_open) for the bond
    /// `<z, z + e_axis>`.
    ///
    /// Transverse to `axis` both boxes coincide with the support of the
    /// offsets, so only the step coordinate can fail: the departure offset
    /// must be at least `1 - L` and the arrival offset at most `L - 1`.
    #[inline]
    pub fn open_along(&self, z: &Site, axis: usize) -> bool {
        let l = self.amplitude;
        if l < 0.5 {
            return false;
        }
        self.x.offset_along(z, axis) >= 1.0 - l && self.y.offset_along(&z.step(axis), axis) <= l - 1.0
    }

    /// Whether every bond of an oriented walk through `sites` is open.
    pub fn walk_open(&self, sites: &[Site]) -> bool {
        sites.windows(2).all(|w| {
            let axis = w[0]
                .unit_step_to(&w[1])
                .expect("consecutive sites of an oriented walk");
            self.open_along(&w[0], axis)
        })
    }
}

/// Number of open bonds among `n` independent draws: draw `i` uses trial
/// `i` of `seed` and the bond `<0, e_{i mod dim}>` of `Z^dim`.
pub fn count_open_bonds(amplitude: f64, dim: usize, n: u64, seed: u64) -> Result<u64> {
    use rayon::prelude::*;
    if !(1..=crate::lattice::MAX_DIM).contains(&dim) {
        return Err(invalid(format!("dimension must lie in 1..={}", crate::lattice::MAX_DIM)));
    }
    p_hat(amplitude)?;
    let origin = Site::origin(dim);
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let r = CoupledBondRealization::for_trial(seed, i, amplitude).expect("amplitude validated");
            r.open_along(&origin, (i % dim as u64) as usize) as u64
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::wilson_interval;

    fn s(c: &[i64]) -> Site {
        Site::new(c).unwrap()
    }

    #[test]
    fn p_hat_values() {
        assert_eq!(p_hat(0.5).unwrap(), 0.0);
        assert_eq!(p_hat(0.3).unwrap(), 0.0);
        assert_eq!(p_hat(1.0).unwrap(), 0.25);
        assert_eq!(p_hat(2.0).unwrap(), 0.5625);
        assert!(p_hat(0.0).is_err());
        assert!(p_hat(-1.0).is_err());
        assert!(p_hat(f64::INFINITY).is_err());
    }

    #[test]
    fn rejects_non_adjacent() {
        let r = CoupledBondRealization::for_trial(1, 0, 1.0).unwrap();
        assert!(matches!(r.bond_open(&s(&[0, 0]), &s(&[1, 1])), Err(Error::MalformedBond(_))));
        assert!(matches!(r.bond_open(&s(&[0, 0]), &s(&[-1, 0])), Err(Error::MalformedBond(_))));
        assert!(r.bond_open(&s(&[0, 0]), &s(&[0, 0, 1])).is_err());
    }

    #[test]
    fn sub_half_amplitude_never_opens() {
        for trial in 0..500 {
            let r = CoupledBondRealization::for_trial(9, trial, 0.49).unwrap();
            let z = s(&[trial as i64, 3]);
            assert!(!r.bond_open(&z, &z.step(0)).unwrap());
            assert!(!r.bond_open(&z, &z.step(1)).unwrap());
            assert!(!r.open_along(&z, 1));
        }
    }

    #[test]
    fn fast_path_matches_definition() {
        for &l in &[0.5, 0.6, 1.0, 1.7, 4.0] {
            for trial in 0..200u64 {
                let r = CoupledBondRealization::for_trial(21, trial, l).unwrap();
                for k in 0..10i64 {
                    let z = s(&[k - 5, 2 * k, -k]);
                    for axis in 0..3 {
                        assert_eq!(
                            r.bond_open(&z, &z.step(axis)).unwrap(),
                            r.open_along(&z, axis),
                            "L={l} trial={trial} z={z:?} axis={axis}"
                        );
                    }
                }
            }
        }
    }

    fn open_fraction(l: f64, n: u64) -> (u64, f64) {
        let z = s(&[0, 0]);
        let w = z.step(0);
        let k = (0..n)
            .filter(|&i| {
                CoupledBondRealization::for_trial(77, i, l)
                    .unwrap()
                    .bond_open(&z, &w)
                    .unwrap()
            })
            .count() as u64;
        (k, k as f64 / n as f64)
    }

    #[test]
    fn open_rate_at_unit_amplitude() {
        let n = 100_000;
        let (_, frac) = open_fraction(1.0, n);
        // Binomial SE at p = 0.25: sqrt(0.25 * 0.75 / 1e5) = 0.00137.
        assert!((frac - 0.25).abs() < 3.0 * 0.00137, "{frac}");
    }

    #[test]
    fn open_rate_at_large_amplitude() {
        let n = 100_000;
        let (k, _) = open_fraction(100.0, n);
        let target = p_hat(100.0).unwrap();
        let ci = wilson_interval(k, n, 0.997).unwrap();
        assert!(ci.contains(target), "{ci:?} vs {target}");
    }
}
