//! Index-pair sets over the entries of a `p x p` matrix, and the restricted
//! Kronecker-product blocks the incoherence diagnostics need.
//!
//! The Hessian of the log-det term at the true balance matrix is
//! `Gamma = Binv (x) Binv` (`(x)` = Kronecker product), a `p^2 x p^2` matrix
//! indexed by entry pairs. It is never materialized in full: the checks only
//! need blocks picked out by two pair sets, and each block entry is a product
//! of two entries of `Binv`. Vectorization is column-stacking, under which
//! the block entry for row pair `(i, j)` and column pair `(k, l)` is
//! `Binv[i][k] * Binv[j][l]`.

use alloc::vec::Vec;

use super::{abs, SymMatrix};
use crate::{Error, Result};

/// An ordered set of matrix index pairs `(row, col)`, kept sorted
/// lexicographically and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pairs: Vec<(usize, usize)>,
}

impl IndexSet {
    /// Build from arbitrary pairs: sorts and removes duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> IndexSet {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        IndexSet { pairs }
    }

    /// Empty set.
    pub fn empty() -> IndexSet {
        IndexSet { pairs: Vec::new() }
    }

    /// Off-diagonal support of a matrix at threshold `eps`
    /// (both orientations of every entry with `|a_ij| > eps`).
    pub fn offdiag_support(a: &SymMatrix, eps: f64) -> IndexSet {
        let n = a.dim();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && abs(a.get(i, j)) > eps {
                    pairs.push((i, j));
                }
            }
        }
        IndexSet { pairs } // already lexicographic by construction
    }

    /// This set augmented with every diagonal pair `(i, i)`, `i < p`.
    pub fn with_diagonal(&self, p: usize) -> IndexSet {
        let mut pairs = self.pairs.clone();
        pairs.extend((0..p).map(|i| (i, i)));
        pairs.sort_unstable();
        pairs.dedup();
        IndexSet { pairs }
    }

    /// All pairs of the `p x p` index square not in this set.
    pub fn complement(&self, p: usize) -> IndexSet {
        let mut pairs = Vec::with_capacity(p * p - self.pairs.len());
        for i in 0..p {
            for j in 0..p {
                if !self.contains(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        IndexSet { pairs }
    }

    /// Membership test.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.binary_search(&(i, j)).is_ok()
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True if no pairs.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Iterate pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Number of pairs also present in `other`.
    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        self.pairs.iter().filter(|&&(i, j)| other.contains(i, j)).count()
    }

    /// True if every pair of `self` is in `other`.
    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.intersection_len(other) == self.len()
    }
}

/// Infinity operator norm of `Gamma[rows, cols] * inv(Gamma[cols, cols])`
/// where `Gamma = binv (x) binv`.
///
/// This is the quantity inside the mutual-incoherence assumption, with
/// `cols` the augmented support and `rows` its complement. The `cols` block
/// must be well conditioned: a condition number above 1e12 (or a
/// nonpositive eigenvalue) is reported as [`Error::SingularBlock`].
pub fn kron_submatrix_infnorm_product(
    binv: &SymMatrix,
    rows: &IndexSet,
    cols: &IndexSet,
) -> Result<f64> {
    let ne = cols.len();
    if ne == 0 {
        return Err(Error::NoEdges);
    }
    let col_pairs: Vec<(usize, usize)> = cols.iter().collect();

    // Gamma[cols, cols], symmetric because Gamma is and the index list is
    // shared between both sides.
    let gamma_ee = SymMatrix::from_fn(ne, |a, b| {
        let (i, j) = col_pairs[a];
        let (k, l) = col_pairs[b];
        binv.get(i, k) * binv.get(j, l)
    });

    let eig = gamma_ee.eigen();
    let lam_min = eig.values[0];
    let lam_max = eig.values[ne - 1];
    let cond = if lam_min > 0.0 { lam_max / lam_min } else { f64::INFINITY };
    if !(cond < 1e12) {
        return Err(Error::SingularBlock { cond });
    }
    // inv(Gamma[cols, cols]) via the same eigen pathway used everywhere else.
    let v = &eig.vectors;
    let mut inv_ee = alloc::vec![0.0; ne * ne];
    for a in 0..ne {
        for b in a..ne {
            let mut s = 0.0;
            for k in 0..ne {
                s += v[a * ne + k] * v[b * ne + k] / eig.values[k];
            }
            inv_ee[a * ne + b] = s;
            inv_ee[b * ne + a] = s;
        }
    }

    // One row of Gamma[rows, cols] at a time; never materialize the block.
    let mut worst = 0.0f64;
    let mut g = alloc::vec![0.0; ne];
    for (i, j) in rows.iter() {
        for (b, &(k, l)) in col_pairs.iter().enumerate() {
            g[b] = binv.get(i, k) * binv.get(j, l);
        }
        let mut row_sum = 0.0;
        for b in 0..ne {
            let mut s = 0.0;
            for a in 0..ne {
                s += g[a] * inv_ee[a * ne + b];
            }
            row_sum += abs(s);
        }
        worst = worst.max(row_sum);
    }
    Ok(worst)
}
