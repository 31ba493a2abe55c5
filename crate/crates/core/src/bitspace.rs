//! Index-space machinery over F₂^m.
//!
//! A coordinate z = (z₁,…,z_m) is stored as an integer with z₁ in the least
//! significant bit. A one-dimensional subspace {0, g} pairs every index z with
//! z ⊕ g; the pair's representative is its smaller member, and cosets are
//! ordered by representative.

use crate::error::{Error, Result};

/// Largest ambient dimension supported anywhere in the crate.
pub const MAX_DIMENSION: u32 = 14;

/// A point of F₂^m, LSB-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexPoint(pub usize);

impl IndexPoint {
    pub fn new(value: usize, m: u32) -> Result<Self> {
        if value >> m != 0 {
            return Err(Error::IndexOutOfRange { index: value, m });
        }
        Ok(Self(value))
    }

    /// Coordinate z_i for 1-based `i`.
    pub fn coord(self, i: u32) -> bool {
        (self.0 >> (i - 1)) & 1 == 1
    }
}

/// The subspace {0, g} of F₂^m for a nonzero generator g.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subspace1D {
    generator: usize,
    m: u32,
}

impl Subspace1D {
    pub fn new(generator: usize, m: u32) -> Result<Self> {
        if m == 0 || m > MAX_DIMENSION {
            return Err(Error::InvalidDimension(m));
        }
        if generator == 0 || generator >> m != 0 {
            return Err(Error::IndexOutOfRange {
                index: generator,
                m,
            });
        }
        Ok(Self { generator, m })
    }

    pub fn generator(&self) -> usize {
        self.generator
    }

    pub fn dimension(&self) -> u32 {
        self.m
    }

    pub fn coset_table(&self) -> CosetTable {
        CosetTable::new(*self)
    }
}

/// All 2^m − 1 one-dimensional subspaces in increasing generator order.
pub fn all_subspaces(m: u32) -> Result<Vec<Subspace1D>> {
    if m == 0 || m > MAX_DIMENSION {
        return Err(Error::InvalidDimension(m));
    }
    Ok((1..1usize << m)
        .map(|generator| Subspace1D { generator, m })
        .collect())
}

/// The 2^(m−1) cosets of a [`Subspace1D`].
///
/// Representatives are exactly the indices whose bit at the generator's
/// highest set position is zero, so the table is implicit: the j-th
/// representative is j with a zero bit inserted at that position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CosetTable {
    subspace: Subspace1D,
    pivot: u32,
}

impl CosetTable {
    pub fn new(subspace: Subspace1D) -> Self {
        let pivot = usize::BITS - 1 - subspace.generator.leading_zeros();
        Self { subspace, pivot }
    }

    pub fn subspace(&self) -> Subspace1D {
        self.subspace
    }

    /// Number of cosets, 2^(m−1).
    pub fn len(&self) -> usize {
        1 << (self.subspace.m - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Representative (smaller member) of the coset with the given ordinal.
    #[inline]
    pub fn rep(&self, ordinal: usize) -> usize {
        let low = ordinal & ((1 << self.pivot) - 1);
        ((ordinal >> self.pivot) << (self.pivot + 1)) | low
    }

    /// Both members of the coset with the given ordinal, smaller first.
    #[inline]
    pub fn pair(&self, ordinal: usize) -> (usize, usize) {
        let a = self.rep(ordinal);
        (a, a ^ self.subspace.generator)
    }

    /// Ordinal of the coset containing `z`.
    pub fn coset_of(&self, z: IndexPoint) -> Result<usize> {
        if z.0 >> self.subspace.m != 0 {
            return Err(Error::IndexOutOfRange {
                index: z.0,
                m: self.subspace.m,
            });
        }
        Ok(self.ordinal_unchecked(z.0))
    }

    #[inline]
    pub(crate) fn ordinal_unchecked(&self, z: usize) -> usize {
        let rep = if (z >> self.pivot) & 1 == 1 {
            z ^ self.subspace.generator
        } else {
            z
        };
        let low = rep & ((1 << self.pivot) - 1);
        ((rep >> (self.pivot + 1)) << self.pivot) | low
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(move |j| self.pair(j))
    }
}

/// Convenience wrapper for [`CosetTable::coset_of`].
pub fn coset_of(b: Subspace1D, z: IndexPoint) -> Result<usize> {
    b.coset_table().coset_of(z)
}
