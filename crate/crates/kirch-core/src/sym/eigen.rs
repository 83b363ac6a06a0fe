//! Cyclic Jacobi eigendecomposition for symmetric matrices, and the
//! square-root / inverse / log-determinant operations built on it.
//!
//! Jacobi is chosen over a tridiagonalize-then-QL scheme because at the sizes
//! this crate works with it is fast enough, its eigenvectors are orthogonal
//! to machine precision by construction, and the implementation is small
//! enough to audit line by line.

use alloc::vec;
use alloc::vec::Vec;

use super::{abs, ln, sqrt, SymMatrix};
use crate::{Error, Result};

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
///
/// `vectors` is row-major `n x n`; column `k` is the unit eigenvector for
/// `values[k]`, so `A = V diag(values) V^T`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row-major orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Vec<f64>,
}

impl EigenPair {
    /// Reassemble `V f(diag) V^T` for a function of the eigenvalues.
    fn reassemble(&self, n: usize, f: impl Fn(f64) -> f64) -> SymMatrix {
        let v = &self.vectors;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += v[i * n + k] * f(self.values[k]) * v[j * n + k];
                }
                m.set(i, j, acc);
            }
        }
        m
    }
}

impl SymMatrix {
    /// Full eigendecomposition by cyclic Jacobi sweeps.
    pub fn eigen(&self) -> EigenPair {
        let n = self.dim();
        let mut a = self.as_slice().to_vec();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        if n > 1 {
            jacobi(n, &mut a, &mut v);
        }
        let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();

        // Sort ascending, permuting eigenvector columns to match.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| values[x].partial_cmp(&values[y]).unwrap());
        let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let mut sorted_vectors = vec![0.0; n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                sorted_vectors[row * n + new_col] = v[row * n + old_col];
            }
        }
        values = sorted_values;
        EigenPair { values, vectors: sorted_vectors }
    }

    /// Symmetric positive semidefinite square root `V diag(sqrt(lambda)) V^T`.
    ///
    /// Eigenvalues below `-tol` (with `tol = 1e-10 * max(1, |lambda|_max)`)
    /// are an error; tiny negative values from rounding are clamped to zero.
    pub fn sym_sqrt(&self) -> Result<SymMatrix> {
        let eig = self.eigen();
        let scale = eig.values.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
        let tol = 1e-10 * scale.max(1.0);
        if let Some(&min) = eig.values.first() {
            if min < -tol {
                return Err(Error::NotPd { min_eig: min });
            }
        }
        Ok(eig.reassemble(self.dim(), |l| sqrt(l.max(0.0))))
    }

    /// Inverse through the eigendecomposition; requires strict positive
    /// definiteness (min eigenvalue above `1e-12 * max(1, |lambda|_max)`).
    pub fn sym_inv(&self) -> Result<SymMatrix> {
        let eig = self.eigen();
        let scale = eig.values.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
        let floor = 1e-12 * scale.max(1.0);
        if let Some(&min) = eig.values.first() {
            if min <= floor {
                return Err(Error::NotPd { min_eig: min });
            }
        }
        Ok(eig.reassemble(self.dim(), |l| 1.0 / l))
    }

    /// `log det` as the sum of eigenvalue logs; same PD requirement as
    /// [`SymMatrix::sym_inv`].
    pub fn log_det(&self) -> Result<f64> {
        let eig = self.eigen();
        let scale = eig.values.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
        let floor = 1e-12 * scale.max(1.0);
        if let Some(&min) = eig.values.first() {
            if min <= floor {
                return Err(Error::NotPd { min_eig: min });
            }
        }
        Ok(eig.values.iter().map(|&l| ln(l)).sum())
    }

    /// Smallest eigenvalue (convenience for PD assertions in tests and
    /// diagnostics).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values[0]
    }
}

/// In-place cyclic Jacobi: on return `a` is (numerically) diagonal and `v`
/// holds the accumulated rotations, `A_input = V diag(a) V^T`.
fn jacobi(n: usize, a: &mut [f64], v: &mut [f64]) {
    const MAX_SWEEPS: usize = 64;
    let initial_off = off_norm(n, a);
    if initial_off == 0.0 {
        return;
    }
    let target = initial_off * 1e-15 + f64::MIN_POSITIVE;
    for _ in 0..MAX_SWEEPS {
        if off_norm(n, a) <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Skip rotations that cannot change anything at this scale.
                if abs(apq) <= f64::EPSILON * 1e-3 * (abs(app) + abs(aqq)) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        let new_p = c * akp - s * akq;
                        let new_q = s * akp + c * akq;
                        a[k * n + p] = new_p;
                        a[p * n + k] = new_p;
                        a[k * n + q] = new_q;
                        a[q * n + k] = new_q;
                    }
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
}

/// Frobenius norm of the off-diagonal part.
fn off_norm(n: usize, a: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sqrt(s)
}
