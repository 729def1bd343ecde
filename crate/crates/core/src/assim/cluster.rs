//! Discontinuity detection and the region split used to mask correlations.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Index `i` with the largest `|m[i+1] - m[i]|`; the smallest such index on ties.
pub fn detect_discontinuity<T: Real>(mean: &[T], dx: T) -> usize {
    let mut best = 0;
    let mut best_val = T::neg_infinity();
    for (i, w) in mean.windows(2).enumerate() {
        let d = ((w[1] - w[0]) / dx).abs();
        if d > best_val {
            best = i;
            best_val = d;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Smooth part left of the discontinuity.
    Left,
    Discontinuity,
    /// Smooth part right of the discontinuity.
    Right,
}

/// Split of `0..n` into a smooth left part, the discontinuity region and a smooth right part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPartition {
    pub xi: usize,
    pub left: Range<usize>,
    pub discontinuity: Range<usize>,
    pub right: Range<usize>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.right.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn region(&self, i: usize) -> Region {
        if i < self.discontinuity.start {
            Region::Left
        } else if i < self.discontinuity.end {
            Region::Discontinuity
        } else {
            Region::Right
        }
    }

    /// Whether a correlation between `i` and `j` survives masking.
    pub fn keeps(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        let (a, b) = (self.region(i), self.region(j));
        a == b && a != Region::Discontinuity
    }
}

/// Points within `dist` of `xi`, clipped to the grid, and the two sides around them.
pub fn cluster_partition(xi: usize, dist: usize, n: usize) -> Result<ClusterPartition> {
    if xi >= n {
        return Err(Error::InvalidParameter(format!("discontinuity index {xi} outside 0..{n}")));
    }
    let lo = xi.saturating_sub(dist);
    let hi = (xi + dist + 1).min(n);
    Ok(ClusterPartition { xi, left: 0..lo, discontinuity: lo..hi, right: hi..n })
}

/// Zeroes correlations across regions and inside the discontinuity region.
pub fn mask_correlations<T: Real>(r: &Matrix<T>, partition: &ClusterPartition) -> Result<Matrix<T>> {
    if r.nrows() != partition.len() || r.ncols() != partition.len() {
        return Err(Error::Dimension(format!(
            "{}x{} correlation matrix for a partition of {} points",
            r.nrows(),
            r.ncols(),
            partition.len()
        )));
    }
    Ok(Matrix::from_fn(r.nrows(), r.ncols(), |i, j| {
        if partition.keeps(i, j) {
            r[(i, j)]
        } else {
            T::zero()
        }
    }))
}
