//! Dense level-by-level sweeps over the cone `{z >= 0 : |z| <= t}`.
//!
//! Values live in a flat array indexed by a box containing `[0, T]^{d*}`; each level
//! keeps a list of its nonzero entries so that work is proportional to the
//! number of reached sites rather than to the box volume.

use num_bigint::BigUint;
use num_traits::Zero;

use super::bond::BondField;
use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};

/// Largest dense box, in entries.
pub const MAX_SLAB_ENTRIES: usize = 1 << 27;

pub(crate) trait Weight: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn accumulate(&mut self, other: &Self);
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn accumulate(&mut self, other: &Self) {
        *self += *other;
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
}

impl Weight for bool {
    fn zero() -> Self {
        false
    }
    fn is_zero(&self) -> bool {
        !*self
    }
    fn accumulate(&mut self, _other: &Self) {
        *self = true;
    }
}

pub(crate) struct Frontier<V: Weight> {
    dstar: usize,
    /// log2 of the padded side length.
    shift: u32,
    strides: [usize; MAX_DIM],
    level: u64,
    values: Vec<V>,
    next: Vec<V>,
    /// Flat indices of the nonzero entries, in discovery order.
    active: Vec<u32>,
    next_active: Vec<u32>,
}

impl<V: Weight> Frontier<V> {
    /// A frontier holding `seed` at the origin of level 0.
    pub fn new(dstar: usize, horizon: u64, seed: V) -> Result<Self> {
        // A power-of-two side lets indices be decoded with shifts.
        let side = (horizon as usize + 1).next_power_of_two();
        let mut strides = [0usize; MAX_DIM];
        let mut len = 1usize;
        for s in strides.iter_mut().take(dstar) {
            *s = len;
            len = len
                .checked_mul(side)
                .filter(|&l| l <= MAX_SLAB_ENTRIES)
                .ok_or_else(|| {
                    Error::BudgetExceeded(format!(
                        "dense storage for horizon {horizon} in {dstar} spatial dimensions exceeds {MAX_SLAB_ENTRIES} entries"
                    ))
                })?;
        }
        let mut values = vec![V::zero(); len];
        values[0] = seed;
        Ok(Self {
            dstar,
            shift: side.trailing_zeros(),
            strides,
            level: 0,
            values,
            next: vec![V::zero(); len],
            active: vec![0],
            next_active: Vec::new(),
        })
    }

    #[inline]
    fn site(&self, idx: u32) -> Site {
        let mut z = Site::origin(self.dstar);
        let mask = (1usize << self.shift) - 1;
        for axis in 0..self.dstar {
            z.coords[axis] = ((idx as usize >> (self.shift as usize * axis)) & mask) as i64;
        }
        z
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Nonzero entries of the current level, in discovery order.
    pub fn entries(&self) -> impl Iterator<Item = (Site, &V)> {
        self.active.iter().map(move |&i| (self.site(i), &self.values[i as usize]))
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut V)) {
        for &i in &self.active {
            f(&mut self.values[i as usize]);
        }
    }

    /// Pushes every value one level forward along the open bonds of `field`.
    pub fn advance(&mut self, field: &BondField) {
        let t = self.level + 1;
        let ndirs = self.dstar + 1;
        for k in 0..self.active.len() {
            let idx = self.active[k] as usize;
            let z = self.site(idx as u32);
            let v = std::mem::replace(&mut self.values[idx], V::zero());
            let mask = field.open_mask(t, &z);
            for dir in 0..ndirs {
                if mask & (1 << dir) == 0 {
                    continue;
                }
                let j = if dir == 0 { idx } else { idx + self.strides[dir - 1] };
                let slot = &mut self.next[j];
                if slot.is_zero() {
                    self.next_active.push(j as u32);
                }
                slot.accumulate(&v);
            }
        }
        std::mem::swap(&mut self.values, &mut self.next);
        std::mem::swap(&mut self.active, &mut self.next_active);
        self.next_active.clear();
        self.level = t;
    }
}
