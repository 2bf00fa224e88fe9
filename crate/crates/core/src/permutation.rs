use nalgebra::{DMatrix, Scalar};
use serde::Serialize;

use crate::error::{Error, Result};

/// A permutation of `{0, …, n-1}` stored as its forward map `old ↦ new`.
///
/// The associated permutation matrix `P` has `P[old, new] = 1`, so that
/// `P′ M P` moves entry `(u, v)` of `M` to `(map[u], map[v])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Builds from a forward map `map[old] = new`.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &t in &map {
            if t >= n || seen[t] {
                return Err(Error::InvalidPartition(format!("{map:?} is not a permutation of 0..{n}")));
            }
            seen[t] = true;
        }
        Ok(Self { map })
    }

    /// Builds from an ordering: `order[new] = old`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut map = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || map[old] != usize::MAX {
                return Err(Error::InvalidPartition(format!("{order:?} is not an ordering of 0..{n}")));
            }
            map[old] = new;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &t)| i == t)
    }

    #[inline]
    pub fn apply(&self, old: usize) -> usize {
        self.map[old]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `order[new] = old`.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.map.len()];
        for (old, &new) in self.map.iter().enumerate() {
            order[new] = old;
        }
        order
    }

    pub fn inverse(&self) -> Self {
        Self { map: self.order() }
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Self {
        Self { map: self.map.iter().map(|&t| other.map[t]).collect() }
    }

    /// `P′ v`: entry `i` moves to position `map[i]`.
    pub fn permute_vector<T: Clone>(&self, v: &[T]) -> Vec<T> {
        let order = self.order();
        order.iter().map(|&old| v[old].clone()).collect()
    }

    /// `P v`: position `i` receives entry `map[i]`.
    pub fn unpermute_vector<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.map.iter().map(|&new| v[new].clone()).collect()
    }

    /// `P′ M`.
    pub fn permute_rows<T: Scalar>(&self, m: &DMatrix<T>) -> DMatrix<T> {
        let order = self.order();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(order[i], j)].clone())
    }

    /// `M P`.
    pub fn permute_cols<T: Scalar>(&self, m: &DMatrix<T>) -> DMatrix<T> {
        let order = self.order();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, order[j])].clone())
    }

    /// `P′ M P`.
    pub fn permute_symmetric<T: Scalar>(&self, m: &DMatrix<T>) -> DMatrix<T> {
        let order = self.order();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(order[i], order[j])].clone())
    }

    /// Dense 0/1 permutation matrix with `P[old, map[old]] = 1`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.map.len();
        let mut p = DMatrix::zeros(n, n);
        for (old, &new) in self.map.iter().enumerate() {
            p[(old, new)] = 1.0;
        }
        p
    }
}
