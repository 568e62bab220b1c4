use serde::{Deserialize, Serialize};

use super::geometry::{Point, Site};
use crate::error::{invalid, Result};
use crate::stats::stream::{namespace, trial_seed, unit_from_word, RandomStream};

/// Identity of one of the three independent perturbation sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldLabel {
    /// Departure field of the full lattice.
    X,
    /// Arrival field; also realizes the lattice with the origin removed.
    Y,
    /// Independent copy used by the shifted lattice.
    XPrime,
}

impl FieldLabel {
    pub const fn namespace(self) -> u64 {
        match self {
            FieldLabel::X => namespace("field/x"),
            FieldLabel::Y => namespace("field/y"),
            FieldLabel::XPrime => namespace("field/x-prime"),
        }
    }
}

/// i.i.d. uniform offsets on `[-L, L]^d`, realized lazily site by site.
///
/// Each coordinate of `offset(z)` is an independent uniform draw computed from
/// `(seed, label, z, axis)`, so the infinite field never has to be stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationField {
    seed: u64,
    amplitude: f64,
    label: FieldLabel,
    stream: RandomStream,
}

impl PerturbationField {
    pub fn new(seed: u64, amplitude: f64, label: FieldLabel) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(invalid(format!(
                "perturbation amplitude must be positive and finite, got {amplitude}"
            )));
        }
        Ok(Self {
            seed,
            amplitude,
            label,
            stream: RandomStream::new(seed, label.namespace()),
        })
    }

    /// Field of Monte Carlo trial `trial` under `master_seed`.
    pub fn for_trial(master_seed: u64, trial: u64, amplitude: f64, label: FieldLabel) -> Result<Self> {
        Self::new(trial_seed(master_seed, trial), amplitude, label)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    /// One coordinate of the offset at `z`.
    #[inline]
    pub fn offset_along(&self, z: &Site, axis: usize) -> f64 {
        let u = unit_from_word(self.stream.word_for_site(z.coords(), &[axis as u64]));
        -self.amplitude + 2.0 * self.amplitude * u
    }

    pub fn offset(&self, z: &Site) -> Point {
        let mut p = Point::zero(z.dim());
        for axis in 0..z.dim() {
            p.set(axis, self.offset_along(z, axis));
        }
        p
    }

    /// One coordinate of the perturbed point `z + offset(z)`.
    #[inline]
    pub fn point_along(&self, z: &Site, axis: usize) -> f64 {
        z.get(axis) as f64 + self.offset_along(z, axis)
    }

    /// The perturbed point `z + offset(z)`.
    pub fn point(&self, z: &Site) -> Point {
        Point::translate(z, &self.offset(z))
    }
}
