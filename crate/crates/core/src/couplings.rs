//! Symmetric Ising coupling matrices with a vanishing diagonal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense JSON form: `{"n": .., "values": [[..], ..]}` with a full square matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingDoc<T> {
    pub n: usize,
    pub values: Vec<Vec<T>>,
}

/// Symmetric real `n x n` coupling matrix `J_ij` with `J_ii = 0`.
///
/// Only the strict upper triangle is stored, so symmetry holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "CouplingDoc<T>",
    into = "CouplingDoc<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct CouplingMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

impl<T: Scalar> TryFrom<CouplingDoc<T>> for CouplingMatrix<T> {
    type Error = Error;

    fn try_from(doc: CouplingDoc<T>) -> Result<Self> {
        if doc.values.len() != doc.n || doc.values.iter().any(|r| r.len() != doc.n) {
            return Err(Error::Dimension { expected: doc.n, got: doc.values.len() });
        }
        let dense = DMatrix::from_fn(doc.n, doc.n, |i, j| doc.values[i][j]);
        Self::from_dense(&dense, T::zero())
    }
}

impl<T: Scalar> From<CouplingMatrix<T>> for CouplingDoc<T> {
    fn from(m: CouplingMatrix<T>) -> Self {
        let values = (0..m.n).map(|i| (0..m.n).map(|j| m.get(i, j)).collect()).collect();
        CouplingDoc { n: m.n, values }
    }
}

impl<T: Scalar> CouplingMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![T::zero(); n * n.saturating_sub(1) / 2] }
    }

    /// Builds the matrix from `f(i, j)` evaluated once per pair `i < j`.
    pub fn from_pair_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                let k = m.slot(i, j);
                m.upper[k] = f(i, j);
            }
        }
        m
    }

    /// Takes the off-diagonal part of a square matrix, requiring symmetry
    /// within `tol` (absolute). The diagonal is discarded.
    pub fn from_dense(dense: &DMatrix<T>, tol: T) -> Result<Self> {
        let n = dense.nrows();
        if dense.ncols() != n {
            return Err(Error::Dimension { expected: n, got: dense.ncols() });
        }
        for i in 0..n {
            for j in i + 1..n {
                if (dense[(i, j)] - dense[(j, i)]).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "coupling matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_pair_fn(n, |i, j| dense[(i, j)]))
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => T::zero(),
            Less => self.upper[self.slot(i, j)],
            Greater => self.upper[self.slot(j, i)],
        }
    }

    /// Sets `J_ij = J_ji = value`. Diagonal writes are rejected.
    pub fn set(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        if i == j {
            return Err(Error::InvalidArgument(format!("diagonal entry ({i}, {i}) is fixed at 0")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::Dimension { expected: self.n, got: i.max(j) + 1 });
        }
        let k = self.slot(i.min(j), i.max(j));
        self.upper[k] = value;
        Ok(())
    }

    /// Pairs `(i, j, J_ij)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn max_abs(&self) -> T {
        self.upper.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|&v| v * factor).collect() }
    }

    /// `Σ_j J_ij s_j` for a configuration of ±1 spins.
    pub fn local_field(&self, i: usize, spins: &[i8]) -> T {
        spins.iter().enumerate().fold(T::zero(), |acc, (j, &s)| {
            if j == i {
                acc
            } else {
                acc + self.get(i, j) * T::lit(s as f64)
            }
        })
    }

    /// `Σ_j |J_ij|`, the scale against which a local field counts as zero.
    pub fn row_abs_sum(&self, i: usize) -> T {
        (0..self.n).fold(T::zero(), |acc, j| acc + self.get(i, j).abs())
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}
