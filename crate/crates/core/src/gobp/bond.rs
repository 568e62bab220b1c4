use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coupling::{p_hat, CoupledBondRealization, Embedding};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::stats::{mix64, namespace, trial_seed, RandomStream};

const BERNOULLI_NAMESPACE: u64 = namespace("bond/bernoulli");

/// Bernoulli bond keys pack coordinates and levels into 21-bit fields.
pub const MAX_BERNOULLI_HORIZON: u64 = (1 << 21) - 1;
const FIELD_MASK: u64 = (1 << 21) - 1;

/// Absorbs `fields` into the hash state `(h, acc, n)`, three 21-bit fields
/// per word.
#[inline(always)]
fn absorb_fields(state: &mut (u64, u64, u32), fields: impl IntoIterator<Item = u64>) {
    for f in fields {
        state.1 |= (f & FIELD_MASK) << (21 * state.2);
        state.2 += 1;
        if state.2 == 3 {
            state.0 = mix64(state.0 ^ state.1);
            state.1 = 0;
            state.2 = 0;
        }
    }
}

#[inline(always)]
fn finish_fields(state: (u64, u64, u32)) -> u64 {
    if state.2 > 0 {
        mix64(state.0 ^ state.1)
    } else {
        state.0
    }
}

/// Hash of the key `(z, t, pair)` for a fixed spatial dimension. Injective
/// on keys whose fields all fit in 21 bits.
#[inline(always)]
fn bernoulli_word(start: u64, coords: &[i64], t: u64, pair: u64) -> u64 {
    let mut state = (start, 0, 0);
    absorb_fields(&mut state, coords.iter().map(|&c| c as u64));
    absorb_fields(&mut state, [t, pair]);
    finish_fields(state)
}

/// Largest number of spatial axes; one axis of `Z^d` is reserved for time
/// when a field is driven through the embedding.
pub const MAX_SPATIAL_DIM: usize = MAX_DIM - 1;

pub(crate) fn check_spatial_dim(dstar: usize) -> Result<()> {
    if dstar == 0 || dstar > MAX_SPATIAL_DIM {
        return Err(invalid(format!(
            "spatial dimension must lie in 1..={MAX_SPATIAL_DIM}, got {dstar}"
        )));
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// A point `(t, z)` of time-space with nonnegative spatial coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeSpacePoint {
    pub t: u64,
    pub z: Site,
}

impl TimeSpacePoint {
    pub fn new(t: u64, z: Site) -> Result<Self> {
        if !z.is_nonnegative() {
            return Err(invalid(format!("spatial coordinates must be nonnegative: {z:?}")));
        }
        Ok(Self { t, z })
    }

    pub fn origin(dstar: usize) -> Self {
        Self {
            t: 0,
            z: Site::origin(dstar),
        }
    }
}

impl fmt::Debug for TimeSpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.t, self.z)
    }
}

/// A bond from level `t - 1` to level `t`: either a stay move or a step
/// along one spatial axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedBond {
    from: TimeSpacePoint,
    to: TimeSpacePoint,
    dir: usize,
}

impl OrientedBond {
    pub fn new(from: TimeSpacePoint, to: TimeSpacePoint) -> Result<Self> {
        if from.z.dim() != to.z.dim() {
            return Err(Error::MalformedBond(format!(
                "{from:?} -> {to:?}: spatial dimensions differ"
            )));
        }
        if to.t != from.t + 1 {
            return Err(Error::MalformedBond(format!(
                "{from:?} -> {to:?}: level must increase by one"
            )));
        }
        let dir = if to.z == from.z {
            0
        } else {
            match from.z.unit_step_to(&to.z) {
                Some(axis) => axis + 1,
                None => {
                    return Err(Error::MalformedBond(format!(
                        "{from:?} -> {to:?}: endpoints are not adjacent"
                    )))
                }
            }
        };
        Ok(Self { from, to, dir })
    }

    /// The bond leaving `from` in direction `dir` (0 = stay, `i + 1` = axis `i`).
    pub fn from_direction(from: TimeSpacePoint, dir: usize) -> Result<Self> {
        if dir > from.z.dim() {
            return Err(Error::MalformedBond(format!(
                "direction {dir} out of range for {} spatial axes",
                from.z.dim()
            )));
        }
        let z = if dir == 0 { from.z } else { from.z.step(dir - 1) };
        Self::new(from, TimeSpacePoint { t: from.t + 1, z })
    }

    pub fn from(&self) -> TimeSpacePoint {
        self.from
    }

    pub fn to(&self) -> TimeSpacePoint {
        self.to
    }

    pub fn direction(&self) -> usize {
        self.dir
    }

    /// Level of the arrival point.
    pub fn level(&self) -> u64 {
        self.to.t
    }
}

/// How bond states are generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BondModel {
    /// Independent Bernoulli(p) bonds.
    Bernoulli { p: f64 },
    /// Bonds induced by two uniform perturbation fields of amplitude `L`
    /// through the time-space embedding.
    Coupled { amplitude: f64 },
}

impl BondModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BondModel::Bernoulli { p } => check_probability(p),
            BondModel::Coupled { amplitude } => p_hat(amplitude).map(|_| ()),
        }
    }

    /// The swept parameter: `p` or `L`.
    pub fn parameter(&self) -> f64 {
        match *self {
            BondModel::Bernoulli { p } => p,
            BondModel::Coupled { amplitude } => amplitude,
        }
    }

    /// Marginal probability that a bond is open.
    pub fn effective_p(&self) -> Result<f64> {
        match *self {
            BondModel::Bernoulli { p } => check_probability(p).map(|_| p),
            BondModel::Coupled { amplitude } => p_hat(amplitude),
        }
    }

    /// The bond field of trial `trial` under `master_seed`.
    ///
    /// Trial `i` draws the same underlying uniforms whatever the parameter,
    /// so fields at different `p` (or `L`) are monotonically coupled.
    pub fn trial_field(&self, dstar: usize, horizon: u64, master_seed: u64, trial: u64) -> Result<BondField> {
        match *self {
            BondModel::Bernoulli { p } => {
                BondField::bernoulli(p, trial_seed(master_seed, trial), dstar, horizon)
            }
            BondModel::Coupled { amplitude } => BondField::coupled(
                CoupledBondRealization::for_trial(master_seed, trial, amplitude)?,
                Embedding::for_spatial(dstar)?,
                horizon,
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Source {
    Bernoulli {
        p: f64,
        start: u64,
        // Open iff a 32-bit lane of the bond hash is below this value.
        threshold: u64,
    },
    Coupled {
        realization: CoupledBondRealization,
        embedding: Embedding,
    },
}

/// Open/closed states of all bonds up to level `horizon`, evaluated lazily.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondField {
    source: Source,
    dstar: usize,
    horizon: u64,
}

impl BondField {
    pub fn bernoulli(p: f64, seed: u64, dstar: usize, horizon: u64) -> Result<Self> {
        check_probability(p)?;
        check_spatial_dim(dstar)?;
        if horizon > MAX_BERNOULLI_HORIZON {
            return Err(invalid(format!(
                "Bernoulli horizon {horizon} exceeds {MAX_BERNOULLI_HORIZON}"
            )));
        }
        Ok(Self {
            source: Source::Bernoulli {
                p,
                start: RandomStream::new(seed, BERNOULLI_NAMESPACE).start_state(),
                threshold: (p * (1u64 << 32) as f64) as u64,
            },
            dstar,
            horizon,
        })
    }

    /// Time-space bonds read off the coupled `Z^d` rule through `embedding`.
    pub fn coupled(realization: CoupledBondRealization, embedding: Embedding, horizon: u64) -> Result<Self> {
        let dstar = embedding.spatial_dim();
        check_spatial_dim(dstar)?;
        Ok(Self {
            source: Source::Coupled {
                realization,
                embedding,
            },
            dstar,
            horizon,
        })
    }

    pub fn spatial_dim(&self) -> usize {
        self.dstar
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Number of bonds leaving each point: the stay move plus one per axis.
    pub fn out_degree(&self) -> usize {
        self.dstar + 1
    }

    pub fn effective_p(&self) -> f64 {
        match &self.source {
            Source::Bernoulli { p, .. } => *p,
            Source::Coupled { realization, .. } => {
                p_hat(realization.amplitude()).expect("amplitude validated")
            }
        }
    }

    pub fn model(&self) -> BondModel {
        match &self.source {
            Source::Bernoulli { p, .. } => BondModel::Bernoulli { p: *p },
            Source::Coupled { realization, .. } => BondModel::Coupled {
                amplitude: realization.amplitude(),
            },
        }
    }

    /// State of the bond from `(t - 1, z)` in direction `dir`.
    ///
    /// Unchecked hot path: `t >= 1`, `z` nonnegative of the field's spatial
    /// dimension with `|z| <= t - 1`, and `dir <= dstar`.
    #[inline]
    pub fn open_dir(&self, t: u64, z: &Site, dir: usize) -> bool {
        debug_assert!(t >= 1 && dir <= self.dstar && z.dim() == self.dstar);
        match &self.source {
            Source::Bernoulli { start, threshold, .. } => {
                let w = bernoulli_word(*start, z.coords(), t, (dir >> 1) as u64);
                let lane = if dir & 1 == 0 { w & 0xFFFF_FFFF } else { w >> 32 };
                lane < *threshold
            }
            Source::Coupled {
                realization,
                embedding,
            } => {
                let a = embedding.embed_unchecked(t as i64 - 1, z);
                realization.open_along(&a, dir)
            }
        }
    }

    /// Bit `dir` set iff the bond from `(t - 1, z)` in direction `dir` is
    /// open; same preconditions as [`open_dir`](Self::open_dir).
    #[inline]
    pub fn open_mask(&self, t: u64, z: &Site) -> u32 {
        let mut mask = 0u32;
        match &self.source {
            Source::Bernoulli { start, threshold, .. } => {
                // Directions 2k and 2k + 1 share one hash; the coordinate
                // prefix of the key is absorbed once.
                let mut prefix = (*start, 0, 0);
                absorb_fields(&mut prefix, z.coords().iter().map(|&c| c as u64));
                for pair in 0..=(self.dstar >> 1) {
                    let mut state = prefix;
                    absorb_fields(&mut state, [t, pair as u64]);
                    let w = finish_fields(state);
                    let lo = (w & 0xFFFF_FFFF) < *threshold;
                    let hi = (w >> 32) < *threshold && 2 * pair + 1 <= self.dstar;
                    mask |= (lo as u32) << (2 * pair) | (hi as u32) << (2 * pair + 1);
                }
            }
            Source::Coupled { .. } => {
                for dir in 0..=self.dstar {
                    mask |= (self.open_dir(t, z, dir) as u32) << dir;
                }
            }
        }
        mask
    }

    pub fn is_open(&self, bond: &OrientedBond) -> Result<bool> {
        let from = bond.from();
        if from.z.dim() != self.dstar {
            return Err(Error::DimensionMismatch {
                expected: self.dstar,
                got: from.z.dim(),
            });
        }
        if bond.level() > self.horizon {
            return Err(invalid(format!(
                "bond at level {} beyond field horizon {}",
                bond.level(),
                self.horizon
            )));
        }
        if let Source::Coupled { .. } = self.source {
            if from.z.l1_norm() as u64 > from.t {
                return Err(invalid(format!(
                    "{from:?} lies outside the embeddable cone |z| <= t"
                )));
            }
        }
        Ok(self.open_dir(bond.level(), &from.z, bond.direction()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(t: u64, z: &[i64]) -> TimeSpacePoint {
        TimeSpacePoint::new(t, Site::new(z).unwrap()).unwrap()
    }

    #[test]
    fn bond_validation() {
        assert!(OrientedBond::new(tp(0, &[0, 0]), tp(1, &[0, 0])).is_ok());
        assert_eq!(OrientedBond::new(tp(0, &[0, 0]), tp(1, &[0, 1])).unwrap().direction(), 2);
        for (a, b) in [
            (tp(0, &[0, 0]), tp(1, &[1, 1])),
            (tp(0, &[0, 0]), tp(2, &[0, 0])),
            (tp(1, &[1, 0]), tp(2, &[0, 0])),
            (tp(0, &[0]), tp(1, &[0, 0])),
        ] {
            assert!(matches!(OrientedBond::new(a, b), Err(Error::MalformedBond(_))));
        }
        assert!(TimeSpacePoint::new(0, Site::new(&[-1]).unwrap()).is_err());
        assert!(OrientedBond::from_direction(tp(0, &[0]), 2).is_err());
    }

    #[test]
    fn degenerate_probabilities() {
        let one = BondField::bernoulli(1.0, 3, 2, 10).unwrap();
        let zero = BondField::bernoulli(0.0, 3, 2, 10).unwrap();
        for t in 1..=10 {
            for dir in 0..3 {
                let z = Site::new(&[(t as i64 - 1) / 2, 0]).unwrap();
                assert!(one.open_dir(t, &z, dir));
                assert!(!zero.open_dir(t, &z, dir));
            }
        }
        assert!(BondField::bernoulli(1.5, 3, 2, 10).is_err());
        assert!(BondField::bernoulli(0.5, 3, 0, 10).is_err());
    }

    #[test]
    fn bernoulli_open_fraction() {
        let f = BondField::bernoulli(0.5, 99, 2, 1000).unwrap();
        let mut open = 0u64;
        let mut n = 0u64;
        for t in 200..400u64 {
            for a in 0..100 {
                for b in 0..2 {
                    let z = Site::new(&[a, b]).unwrap();
                    for dir in 0..3 {
                        open += f.open_dir(t, &z, dir) as u64;
                        n += 1;
                    }
                }
            }
        }
        assert!(n >= 100_000);
        let frac = open as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * se, "{frac} over {n}");
    }

    #[test]
    fn mask_agrees_with_single_bonds() {
        for dstar in 1..=4 {
            let fields = [
                BondField::bernoulli(0.6, 3, dstar, 10).unwrap(),
                BondModel::Coupled { amplitude: 1.3 }.trial_field(dstar, 10, 3, 0).unwrap(),
            ];
            for f in &fields {
                for t in 1..=10u64 {
                    for a in 0..(t as i64) {
                        let mut c = vec![0i64; dstar];
                        c[0] = a;
                        let z = Site::new(&c).unwrap();
                        let mask = f.open_mask(t, &z);
                        for dir in 0..=dstar {
                            assert_eq!(mask >> dir & 1 == 1, f.open_dir(t, &z, dir));
                        }
                        assert_eq!(mask >> (dstar + 1), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn is_open_checks() {
        let f = BondField::bernoulli(0.5, 1, 2, 3).unwrap();
        let b = OrientedBond::from_direction(tp(3, &[0, 0]), 0).unwrap();
        assert!(f.is_open(&b).is_err());
        let b = OrientedBond::from_direction(tp(2, &[1, 1]), 1).unwrap();
        assert_eq!(f.is_open(&b).unwrap(), f.open_dir(3, &Site::new(&[1, 1]).unwrap(), 1));
        let b = OrientedBond::from_direction(tp(0, &[0]), 0).unwrap();
        assert!(f.is_open(&b).is_err());
    }

    #[test]
    fn monotone_in_p_under_shared_noise() {
        let lo = BondField::bernoulli(0.3, 12, 3, 50).unwrap();
        let hi = BondField::bernoulli(0.31, 12, 3, 50).unwrap();
        for t in 1..50u64 {
            for a in 0..5 {
                let z = Site::new(&[a, 0, 1]).unwrap();
                for dir in 0..4 {
                    assert!(!lo.open_dir(t, &z, dir) || hi.open_dir(t, &z, dir));
                }
            }
        }
    }
}
