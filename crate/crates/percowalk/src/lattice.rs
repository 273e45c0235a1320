//! Lattice sites on Z^d and the packed coordinate keys used by the
//! environment cache.

use std::fmt;

use crate::error::LatticeError;

/// Largest supported dimension. Walks above d = 3 fall back to a slower
/// general-purpose cache key; see [`PackedSite`].
pub const MAX_DIM: usize = 8;

/// Per-axis coordinate bound for the packed d <= 3 representation:
/// 21-bit signed offsets, i.e. |x_k| <= 2^20 - 1.
pub const PACKED_COORD_BOUND: i32 = (1 << 20) - 1;

const PACK_BITS: u32 = 21;
const PACK_MASK: u64 = (1 << PACK_BITS) - 1;
const PACK_OFFSET: i64 = 1 << 20;

/// A point of Z^d, 1 <= d <= [`MAX_DIM`]. Copy-friendly fixed storage;
/// unused axes are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Site {
    pub fn origin(dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Site {
            coords: [0; MAX_DIM],
            dim: dim as u8,
        }
    }

    pub fn from_coords(coords: &[i32]) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&coords.len()));
        let mut c = [0i32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    /// Euclidean norm of the position vector.
    pub fn norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// The neighbor one step along `dir`. Fails if the coordinate leaves the
    /// packed range (d <= 3 only; the cache key cannot represent it).
    pub fn neighbor(&self, dir: Direction) -> Result<Site, LatticeError> {
        let mut out = *self;
        let axis = dir.axis();
        let c = out.coords[axis] + dir.sign();
        if self.dim <= 3 && c.abs() > PACKED_COORD_BOUND {
            return Err(LatticeError::CoordRangeExceeded {
                axis,
                value: c,
                bound: PACKED_COORD_BOUND,
            });
        }
        out.coords[axis] = c;
        Ok(out)
    }

    /// All 2d nearest neighbors (may step outside the packed range; callers
    /// that cache by packed key must bound their walks).
    pub(crate) fn neighbors_unchecked(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.dim()).flat_map(move |axis| {
            [1i32, -1i32].into_iter().map(move |sign| {
                let mut out = *self;
                out.coords[axis] += sign;
                out
            })
        })
    }

    /// Branch-free 21-bit-per-axis key for d <= 3. Returns an error when a
    /// coordinate is out of the documented +-(2^20 - 1) box.
    pub fn packed_key(&self) -> Result<u64, LatticeError> {
        debug_assert!(self.dim <= 3);
        let mut key: u64 = 0;
        for (axis, &c) in self.coords().iter().enumerate() {
            if c.abs() > PACKED_COORD_BOUND {
                return Err(LatticeError::CoordRangeExceeded {
                    axis,
                    value: c,
                    bound: PACKED_COORD_BOUND,
                });
            }
            key |= (((c as i64 + PACK_OFFSET) as u64) & PACK_MASK) << (PACK_BITS * axis as u32);
        }
        Ok(key)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Site{:?}", self.coords())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in self.coords() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// One of the 2d signed unit vectors, indexed `+e_1, -e_1, +e_2, -e_2, ...`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Direction(pub(crate) u8);

impl Direction {
    pub fn all(dim: usize) -> impl Iterator<Item = Direction> {
        (0..2 * dim as u8).map(Direction)
    }

    pub fn index(&self) -> usize {
        self.0 as usize
    }

    pub fn axis(&self) -> usize {
        (self.0 / 2) as usize
    }

    /// +1 for the positive unit vector on the axis, -1 for the negative one.
    pub fn sign(&self) -> i32 {
        if self.0 % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// ell . e for this signed unit vector.
    pub fn dot(&self, ell: &[f64]) -> f64 {
        self.sign() as f64 * ell[self.axis()]
    }
}
