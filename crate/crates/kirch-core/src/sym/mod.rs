//! Dense symmetric matrices and the small linear-algebra kernel the rest of
//! the crate is built on.
//!
//! Everything here is plain `f64` in row-major `Vec`s. Sizes are small (tens,
//! at most a few hundred in the diagnostics blocks), so the kernels are
//! straightforward loops; the point is exactness and reproducibility, not
//! BLAS-level throughput. Eigendecomposition is the single backend for the
//! public square-root / inverse / log-determinant operations, so there is
//! one numerical pathway to validate.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

mod chol;
mod eigen;
mod kron;

pub use chol::Cholesky;
pub use eigen::EigenPair;
pub use kron::{kron_submatrix_infnorm_product, IndexSet};

/// Maximum tolerated asymmetry, relative to the matrix scale, before a
/// construction is rejected instead of symmetrized.
const SKEW_TOL: f64 = 1e-12;

/// A dense symmetric matrix. Construction enforces symmetry (tiny skew is
/// averaged away, anything above [`SKEW_TOL`] relative to the matrix scale is
/// an error) and finiteness, so downstream code can rely on both.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix from a slice.
    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = d[i];
        }
        m
    }

    /// Build from a row-major slice of length `n * n`. The input must be
    /// finite and symmetric up to a relative skew of 1e-12; the stored matrix
    /// is the exact symmetrization `(A + A^T) / 2`.
    pub fn from_rows(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: rows.len() });
        }
        let mut scale: f64 = 0.0;
        for &v in rows {
            if !v.is_finite() {
                return Err(Error::NotFinite);
            }
            scale = scale.max(abs(v));
        }
        let tol = SKEW_TOL * scale.max(1.0);
        let mut data = rows.to_vec();
        for i in 0..n {
            for j in (i + 1)..n {
                let a = rows[i * n + j];
                let b = rows[j * n + i];
                if abs(a - b) > tol {
                    return Err(Error::NotFinite);
                }
                let m = 0.5 * (a + b);
                data[i * n + j] = m;
                data[j * n + i] = m;
            }
        }
        Ok(SymMatrix { n, data })
    }

    /// Build from a function of `(i, j)`; only `i <= j` is evaluated and the
    /// result is mirrored, so symmetry holds by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Set entry `(i, j)` and its mirror.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Row-major backing slice.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Diagonal as a vector.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `self + other`.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a + b)
    }

    /// `self - other`.
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a - b)
    }

    /// `c * self`.
    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| c * v).collect() }
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        SymMatrix { n: self.n, data }
    }

    /// Frobenius inner product `<self, other> = tr(self * other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute entry.
    pub fn elem_max(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(abs(v)))
    }

    /// Largest absolute off-diagonal entry.
    pub fn elem_max_offdiag(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m = m.max(abs(self.get(i, j)));
                }
            }
        }
        m
    }

    /// Maximum absolute row sum (the operator infinity norm).
    pub fn row_sum_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let s: f64 = self.data[i * self.n..(i + 1) * self.n].iter().map(|v| abs(*v)).sum();
            m = m.max(s);
        }
        m
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum::<f64>())
    }

    /// Sum of absolute off-diagonal entries (both orientations).
    pub fn l1_offdiag(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += abs(self.get(i, j));
                }
            }
        }
        s
    }

    /// All four norms used by the theory and the metrics. `op2` costs an
    /// eigendecomposition.
    pub fn norms(&self) -> MatrixNorms {
        let eig = self.eigen();
        let op2 = eig.values.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
        MatrixNorms {
            elem_max: self.elem_max(),
            row_sum: self.row_sum_norm(),
            fro: self.fro_norm(),
            op2,
        }
    }

    /// General (non-symmetric) product `self * other`, row-major.
    pub(crate) fn mul_buf(&self, other: &[f64]) -> Vec<f64> {
        mat_mul(self.n, &self.data, other)
    }

    /// Symmetrize a row-major buffer into a `SymMatrix`: `(M + M^T) / 2`.
    /// For buffers that are symmetric in exact arithmetic this removes only
    /// rounding skew.
    pub(crate) fn from_buf_symmetrized(n: usize, buf: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (buf[i * n + j] + buf[j * n + i]);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }
}

/// The norm bundle reported by [`SymMatrix::norms`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MatrixNorms {
    /// Largest absolute entry.
    pub elem_max: f64,
    /// Maximum absolute row sum (operator infinity norm).
    pub row_sum: f64,
    /// Frobenius norm.
    pub fro: f64,
    /// Spectral norm (largest absolute eigenvalue).
    pub op2: f64,
}

/// Row-major product of two `n x n` buffers.
pub(crate) fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
    out
}

// Small shims so the crate builds without `std`; with `std` the inherent f64
// methods win and these are equivalent.
#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    num_traits::Float::abs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    num_traits::Float::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    num_traits::Float::ln(x)
}
