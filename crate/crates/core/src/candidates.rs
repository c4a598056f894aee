//! Blocksize candidate generation.
//!
//! The search space is built by dividing each dimension into `P` parts,
//! giving `nC = |b_i| * |b_j| * |b_k|` combinations, or by laying a strided
//! lattice over the dimension for the exhaustive-search oracle.

use crate::error::Error;
use crate::stencil::{BlockSize, ProblemSize};
use serde::{Deserialize, Serialize};

/// An ordered blocksize search space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    /// The tested values along each dimension, strictly increasing.
    pub per_dim_values: [Vec<usize>; 3],
    /// Cartesian product of the per-dimension lists in lexicographic
    /// (i, j, k) order.
    pub combinations: Vec<BlockSize>,
}

impl CandidateSet {
    fn from_values(per_dim_values: [Vec<usize>; 3]) -> Self {
        let [vi, vj, vk] = &per_dim_values;
        let mut combinations = Vec::with_capacity(vi.len() * vj.len() * vk.len());
        for &i in vi {
            for &j in vj {
                for &k in vk {
                    combinations.push(BlockSize { i, j, k });
                }
            }
        }
        Self {
            per_dim_values,
            combinations,
        }
    }

    /// Number of combinations, `nC`.
    pub fn len(&self) -> usize {
        self.combinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combinations.is_empty()
    }
}

/// Divide each dimension into `parts` pieces: the tested values are
/// `floor(m * S_l / (P_l - 1)) + 1` for `m = 0..P_l`, with the final value
/// clamped to `S_l` and duplicates removed.
pub fn generate(size: ProblemSize, parts: (usize, usize, usize)) -> Result<CandidateSet, Error> {
    let values = |extent: usize, p: usize| -> Result<Vec<usize>, Error> {
        if p < 2 {
            return Err(Error::InvalidParts(p));
        }
        if extent < p - 1 {
            return Err(Error::SizeTooSmallForParts {
                size: extent,
                parts: p,
            });
        }
        let mut list = Vec::with_capacity(p);
        for m in 0..p {
            let v = (m * extent / (p - 1) + 1).min(extent);
            if list.last() != Some(&v) {
                list.push(v);
            }
        }
        Ok(list)
    };
    Ok(CandidateSet::from_values([
        values(size.i, parts.0)?,
        values(size.j, parts.1)?,
        values(size.k, parts.2)?,
    ]))
}

/// Uniform-parts convenience for [`generate`].
pub fn generate_uniform(size: ProblemSize, parts: usize) -> Result<CandidateSet, Error> {
    generate(size, (parts, parts, parts))
}

/// Arithmetic lattice `offset, offset + d_l, ...` clipped to `[1, S_l]`,
/// with `S_l` itself appended. This is the grid the exhaustive-search
/// oracle sweeps.
pub fn exhaustive_grid(
    size: ProblemSize,
    strides: (usize, usize, usize),
    offset: usize,
) -> Result<CandidateSet, Error> {
    let values = |extent: usize, stride: usize| -> Result<Vec<usize>, Error> {
        if stride == 0 {
            return Err(Error::InvalidStride);
        }
        // First progression element inside [1, extent].
        let first = if offset >= 1 { offset } else { stride };
        let mut list: Vec<usize> = (first..=extent).step_by(stride).collect();
        if list.last() != Some(&extent) {
            list.push(extent);
        }
        if list.is_empty() {
            return Err(Error::EmptyLattice(extent));
        }
        Ok(list)
    };
    Ok(CandidateSet::from_values([
        values(size.i, strides.0)?,
        values(size.j, strides.1)?,
        values(size.k, strides.2)?,
    ]))
}
