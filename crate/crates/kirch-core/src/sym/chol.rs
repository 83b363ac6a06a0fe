//! Cholesky factorization with an explicit pivot floor.
//!
//! The solver's positive-definiteness safeguard runs once per proximal
//! candidate, so it must be cheap: a failed pivot is the rejection signal,
//! and a successful factor hands back the log-determinant and the inverse
//! almost for free. The eigen-backed public operations in this module's
//! parent stay the reference pathway; tests cross-check the two.

use alloc::vec;
use alloc::vec::Vec;

use super::{ln, sqrt, SymMatrix};
use crate::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle (upper part zero).
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor a symmetric matrix, failing with [`Error::NotPd`] if any pivot
    /// (Schur-complement diagonal, an upper bound on the smallest eigenvalue)
    /// drops to `floor` or below. Pass `0.0` to accept any numerically PD
    /// matrix; the solver passes its scaled PD floor.
    pub fn factor(a: &SymMatrix, floor: f64) -> Result<Cholesky> {
        let n = a.dim();
        let src = a.as_slice();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = src[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > floor) || !d.is_finite() {
                return Err(Error::NotPd { min_eig: d });
            }
            let dj = sqrt(d);
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = src[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        Ok(Cholesky { n, l })
    }

    /// `log det A = 2 * sum log L_jj`.
    pub fn log_det(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            s += ln(self.l[j * self.n + j]);
        }
        2.0 * s
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // Forward: L y = b.
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        // Backward: L^T x = y.
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Inverse `A^{-1} = L^{-T} L^{-1}`, symmetrized against rounding.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        // W = L^{-1}, lower triangular: solve L W = I column by column.
        let mut w = vec![0.0; n * n];
        for j in 0..n {
            w[j * n + j] = 1.0 / self.l[j * n + j];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= self.l[i * n + k] * w[k * n + j];
                }
                w[i * n + j] = s / self.l[i * n + i];
            }
        }
        // A^{-1}[i][j] = sum_k W[k][i] * W[k][j] over k >= max(i, j).
        let mut inv = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in j..n {
                    s += w[k * n + i] * w[k * n + j];
                }
                inv.set(i, j, s);
            }
        }
        inv
    }
}
