//! Cycle-consistent correspondences used as propagation anchors.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{MatrixError, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrigin {
    TwoCycle,
    ThreeCycle,
    Confirmed,
    Mixed,
}

/// Confident `(i, j)` correspondences. Only pair uniqueness is enforced; a
/// row or column may appear in several pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub pairs: BTreeSet<(usize, usize)>,
    pub origin: SeedOrigin,
}

impl SeedSet {
    pub fn new(origin: SeedOrigin) -> Self {
        Self {
            pairs: BTreeSet::new(),
            origin,
        }
    }

    pub fn from_pairs(origin: SeedOrigin, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            pairs: pairs.into_iter().collect(),
            origin,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Union; the origin becomes `Mixed` when the two differ.
    pub fn union(&self, other: &SeedSet) -> SeedSet {
        let origin = if self.origin == other.origin {
            self.origin
        } else {
            SeedOrigin::Mixed
        };
        SeedSet {
            pairs: self.pairs.union(&other.pairs).copied().collect(),
            origin,
        }
    }

    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        self.pairs.remove(&(i, j))
    }

    /// Checks that every pair indexes into a `rows × cols` matrix.
    pub fn check_bounds(&self, rows: usize, cols: usize) -> Result<(), MatrixError> {
        match self.pairs.iter().find(|&&(i, j)| i >= rows || j >= cols) {
            Some(&(i, j)) => Err(MatrixError::SeedOutOfRange { i, j, rows, cols }),
            None => Ok(()),
        }
    }
}

/// Index of the largest value, lowest index on ties; `None` when empty.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

impl SimilarityMatrix {
    /// Column holding the maximum of row `i` (lowest index on ties).
    pub fn row_argmax(&self, i: usize) -> Option<usize> {
        argmax(self.row(i).iter().copied())
    }

    /// Row holding the maximum of column `j` (lowest index on ties).
    pub fn col_argmax(&self, j: usize) -> Option<usize> {
        argmax(self.col(j))
    }

    pub fn row_argmaxes(&self) -> Vec<Option<usize>> {
        (0..self.rows()).map(|i| self.row_argmax(i)).collect()
    }

    pub fn col_argmaxes(&self) -> Vec<Option<usize>> {
        (0..self.cols()).map(|j| self.col_argmax(j)).collect()
    }
}

/// Pairs that are the maximum of both their row and their column.
pub fn two_cycle_seeds(n: &SimilarityMatrix) -> SeedSet {
    let col_best = n.col_argmaxes();
    let pairs = (0..n.rows()).filter_map(|i| {
        let j = n.row_argmax(i)?;
        (col_best[j] == Some(i)).then_some((i, j))
    });
    SeedSet::from_pairs(SeedOrigin::TwoCycle, pairs)
}

/// Seeds that close a cycle through three manuscripts `a`, `b`, `c`.
///
/// `(i, j, k)` qualifies when `j = argmax_row(N_ab, i)`,
/// `k = argmax_row(N_bc, j)`, `argmax_row(N_ac, i) = k`, and each of
/// `(i, j)`, `(j, k)`, `(i, k)` is 2-cycle consistent in its own matrix.
/// Returns the seeds for `(a, b)`, `(b, c)` and `(a, c)`.
pub fn three_cycle_seeds(
    n_ab: &SimilarityMatrix,
    n_bc: &SimilarityMatrix,
    n_ac: &SimilarityMatrix,
) -> Result<(SeedSet, SeedSet, SeedSet), MatrixError> {
    if n_ab.cols() != n_bc.rows() || n_ab.rows() != n_ac.rows() || n_bc.cols() != n_ac.cols() {
        return Err(MatrixError::DimensionMismatch(format!(
            "ab {:?}, bc {:?}, ac {:?}",
            n_ab.shape(),
            n_bc.shape(),
            n_ac.shape()
        )));
    }
    let two_ab = two_cycle_seeds(n_ab);
    let two_bc = two_cycle_seeds(n_bc);
    let two_ac = two_cycle_seeds(n_ac);

    let mut ab = SeedSet::new(SeedOrigin::ThreeCycle);
    let mut bc = SeedSet::new(SeedOrigin::ThreeCycle);
    let mut ac = SeedSet::new(SeedOrigin::ThreeCycle);
    for i in 0..n_ab.rows() {
        let Some(j) = n_ab.row_argmax(i) else {
            continue;
        };
        let Some(k) = n_bc.row_argmax(j) else {
            continue;
        };
        if n_ac.row_argmax(i) != Some(k) {
            continue;
        }
        if two_ab.contains(i, j) && two_bc.contains(j, k) && two_ac.contains(i, k) {
            ab.pairs.insert((i, j));
            bc.pairs.insert((j, k));
            ac.pairs.insert((i, k));
        }
    }
    Ok((ab, bc, ac))
}
