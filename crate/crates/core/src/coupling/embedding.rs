use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Site, MAX_DIM};

/// The level-preserving injection `(t, w) -> (t - |w|, w_1, ..., w_{d-1})`
/// from time-space with `d - 1` spatial axes into `Z^d`.
///
/// The stay move of the time-space process becomes `+e_1`; a move along
/// spatial axis `i` becomes `+e_{i+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Embedding {
    dim: usize,
}

impl Embedding {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 || dim > MAX_DIM {
            return Err(invalid(format!(
                "embedding dimension must lie in 2..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(Self { dim })
    }

    /// Embedding for a time-space process with `dstar` spatial axes.
    pub fn for_spatial(dstar: usize) -> Result<Self> {
        Self::new(dstar + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn embed(&self, t: u64, w: &Site) -> Result<Site> {
        if w.dim() != self.dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim - 1,
                got: w.dim(),
            });
        }
        if !w.is_nonnegative() {
            return Err(invalid(format!("spatial coordinates must be nonnegative: {w:?}")));
        }
        let norm = w.l1_norm() as u64;
        if t < norm {
            return Err(invalid(format!(
                "level {t} is below the l1 norm {norm} of {w:?}; embedded point would leave the orthant"
            )));
        }
        Ok(self.embed_unchecked(t as i64, w))
    }

    /// Embeds without validation; the caller guarantees `t >= |w|` and
    /// nonnegative `w` of the right dimension.
    #[inline]
    pub(crate) fn embed_unchecked(&self, t: i64, w: &Site) -> Site {
        let mut c = [0i64; MAX_DIM];
        c[0] = t - w.l1_norm();
        c[1..self.dim].copy_from_slice(w.coords());
        Site::new(&c[..self.dim]).expect("dimension checked at construction")
    }

    pub fn unembed(&self, z: &Site) -> Result<(u64, Site)> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.dim(),
            });
        }
        if !z.is_nonnegative() {
            return Err(invalid(format!("cannot unembed {z:?}: negative coordinate")));
        }
        let w = Site::new(&z.coords()[1..])?;
        Ok((z.l1_norm() as u64, w))
    }
}
