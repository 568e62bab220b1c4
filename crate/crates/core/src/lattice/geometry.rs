use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 8;

/// A site of the integer lattice `Z^d`.
///
/// Coordinates beyond `dim` are kept at zero so that derived equality,
/// ordering and hashing only see the meaningful prefix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Site {
    dim: u8,
    pub(crate) coords: [i64; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!(
                "site dimension must lie in 1..={MAX_DIM}, got {dim}"
            )));
        }
        let mut c = [0; MAX_DIM];
        c[..dim].copy_from_slice(coords);
        Ok(Self { dim: dim as u8, coords: c })
    }

    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim: dim as u8, coords: [0; MAX_DIM] }
    }

    /// The standard basis vector `e_axis` (zero-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        Self::origin(dim).step(axis)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> i64 {
        self.coords()[axis]
    }

    /// `self + e_axis`.
    #[inline]
    pub fn step(&self, axis: usize) -> Self {
        debug_assert!(axis < self.dim());
        let mut s = *self;
        s.coords[axis] += 1;
        s
    }

    /// `self - e_axis`.
    #[inline]
    pub fn step_back(&self, axis: usize) -> Self {
        debug_assert!(axis < self.dim());
        let mut s = *self;
        s.coords[axis] -= 1;
        s
    }

    pub fn l1_norm(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coords().iter().all(|&c| c >= 0)
    }

    pub fn max_abs(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// If `other == self + e_i` for some axis, returns `i`.
    pub fn unit_step_to(&self, other: &Site) -> Option<usize> {
        if self.dim != other.dim {
            return None;
        }
        let mut axis = None;
        for i in 0..self.dim() {
            match other.coords[i] - self.coords[i] {
                0 => {}
                1 if axis.is_none() => axis = Some(i),
                _ => return None,
            }
        }
        axis
    }

    pub fn as_point(&self) -> Point {
        let mut p = Point::zero(self.dim());
        for (i, &c) in self.coords().iter().enumerate() {
            p.coords[i] = c as f64;
        }
        p
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl TryFrom<Vec<i64>> for Site {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Site::new(&v)
    }
}

impl From<Site> for Vec<i64> {
    fn from(s: Site) -> Self {
        s.coords().to_vec()
    }
}

/// A point of `R^d`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    dim: u8,
    coords: [f64; MAX_DIM],
}

impl Point {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim: dim as u8, coords: [0.0; MAX_DIM] }
    }

    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!(
                "point dimension must lie in 1..={MAX_DIM}, got {dim}"
            )));
        }
        let mut p = Self::zero(dim);
        p.coords[..dim].copy_from_slice(coords);
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> f64 {
        self.coords()[axis]
    }

    #[inline]
    pub(crate) fn set(&mut self, axis: usize, value: f64) {
        self.coords[axis] = value;
    }

    /// `site + offset`, coordinatewise in floating point.
    pub fn translate(site: &Site, offset: &Point) -> Point {
        let mut p = *offset;
        for i in 0..site.dim() {
            p.coords[i] = site.get(i) as f64 + offset.coords[i];
        }
        p
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(&v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

/// Closed axis-aligned box `[low_1, high_1] x ... x [low_d, high_d]`.
///
/// A box with `low_i > high_i` on some axis is empty; intersections of
/// disjoint boxes are represented this way rather than as an error.
#[derive(Clone, Copy, PartialEq)]
pub struct AxisBox {
    dim: u8,
    low: [f64; MAX_DIM],
    high: [f64; MAX_DIM],
}

impl AxisBox {
    pub fn new(low: &[f64], high: &[f64]) -> Result<Self> {
        let dim = low.len();
        if dim != high.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: high.len(),
            });
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("box dimension must lie in 1..={MAX_DIM}")));
        }
        if low.iter().chain(high).any(|x| x.is_nan()) {
            return Err(invalid("box bounds must not be NaN"));
        }
        let mut b = Self {
            dim: dim as u8,
            low: [0.0; MAX_DIM],
            high: [0.0; MAX_DIM],
        };
        b.low[..dim].copy_from_slice(low);
        b.high[..dim].copy_from_slice(high);
        Ok(b)
    }

    /// `center + [-half_width, half_width]^d`.
    pub fn cube(center: &Site, half_width: f64) -> Self {
        let dim = center.dim();
        let mut b = Self {
            dim: dim as u8,
            low: [0.0; MAX_DIM],
            high: [0.0; MAX_DIM],
        };
        for i in 0..dim {
            let c = center.get(i) as f64;
            b.low[i] = c - half_width;
            b.high[i] = c + half_width;
        }
        b
    }

    /// `[-half_width, half_width]^d`.
    pub fn centered(dim: usize, half_width: f64) -> Self {
        Self::cube(&Site::origin(dim), half_width)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn low(&self) -> &[f64] {
        &self.low[..self.dim()]
    }

    pub fn high(&self) -> &[f64] {
        &self.high[..self.dim()]
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim()).any(|i| self.low[i] > self.high[i])
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        debug_assert_eq!(p.dim(), self.dim());
        (0..self.dim()).all(|i| self.low[i] <= p.coords[i] && p.coords[i] <= self.high[i])
    }

    /// Containment test along one axis only.
    #[inline]
    pub fn contains_along(&self, axis: usize, x: f64) -> bool {
        self.low[axis] <= x && x <= self.high[axis]
    }

    pub fn intersect(&self, other: &AxisBox) -> AxisBox {
        debug_assert_eq!(self.dim, other.dim);
        let mut b = *self;
        for i in 0..self.dim() {
            b.low[i] = self.low[i].max(other.low[i]);
            b.high[i] = self.high[i].min(other.high[i]);
        }
        b
    }

    pub fn intersects(&self, other: &AxisBox) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn is_subset_of(&self, other: &AxisBox) -> bool {
        self.is_empty()
            || (0..self.dim()).all(|i| other.low[i] <= self.low[i] && self.high[i] <= other.high[i])
    }

    /// Lebesgue measure; zero for empty boxes.
    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (0..self.dim()).map(|i| self.high[i] - self.low[i]).product()
    }
}

impl fmt::Debug for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sides: Vec<String> = (0..self.dim())
            .map(|i| format!("[{}, {}]", self.low[i], self.high[i]))
            .collect();
        write!(f, "{}", sides.join("x"))
    }
}

/// The support box `J(z) = z + [-L, L]^d` of the perturbed point at `z`.
pub fn j_box(z: &Site, amplitude: f64) -> Result<AxisBox> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(invalid(format!(
            "amplitude must be positive and finite, got {amplitude}"
        )));
    }
    Ok(AxisBox::cube(z, amplitude))
}
