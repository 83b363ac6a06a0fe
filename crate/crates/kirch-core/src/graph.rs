//! Construction of ground-truth network models: a sparse positive definite
//! balance matrix `B*` over a graph, plus the injection covariance and the
//! derived quantities the estimator and the theory checks consume.
//!
//! Synthetic fixtures put `edge_weight` on every edge and make the diagonal
//! `sum of |off-diagonal| + diag_margin`, which is strict diagonal dominance,
//! hence positive definiteness with margin at least `diag_margin` (Gershgorin).
//! Physical fixtures build a weighted graph Laplacian and delete one
//! row/column (grounding a reference node), which is the standard way to make
//! a Laplacian invertible.

use alloc::string::String;
use alloc::vec::Vec;

use crate::sym::{IndexSet, SymMatrix};
use crate::{Error, Result};

/// Declarative description of a ground-truth model; the harness and CLI
/// configs serialize this.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum GraphSpec {
    /// Path graph on `p` nodes.
    Chain {
        p: usize,
        #[cfg_attr(feature = "serde", serde(default = "default_weight"))]
        edge_weight: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_margin"))]
        diag_margin: f64,
    },
    /// `rows x cols` 4-neighbor lattice.
    Grid {
        rows: usize,
        cols: usize,
        #[cfg_attr(feature = "serde", serde(default = "default_weight"))]
        edge_weight: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_margin"))]
        diag_margin: f64,
    },
    /// Explicit weighted edge list on `p` nodes (0-based endpoints).
    EdgeList {
        p: usize,
        edges: Vec<(usize, usize, f64)>,
        /// Build the weighted graph Laplacian instead of the signed-weight
        /// construction (off-diagonals `-w`, diagonal = weighted degree).
        #[cfg_attr(feature = "serde", serde(default))]
        laplacian: bool,
        /// Delete this row/column after building the Laplacian (required for
        /// positive definiteness of a connected graph's Laplacian).
        #[cfg_attr(feature = "serde", serde(default))]
        reduce_node: Option<usize>,
        #[cfg_attr(feature = "serde", serde(default = "default_margin"))]
        diag_margin: f64,
    },
}

#[cfg(feature = "serde")]
fn default_weight() -> f64 {
    1.0
}

#[cfg(feature = "serde")]
fn default_margin() -> f64 {
    1.0
}

/// A fully-built ground-truth model: the balance matrix, the injection
/// covariance, and everything derived from them that the rest of the crate
/// keeps asking for.
#[derive(Clone, Debug)]
pub struct NetworkModel {
    /// Dimension (number of nodes after any reduction).
    pub p: usize,
    /// The true balance matrix (symmetric PD).
    pub b_star: SymMatrix,
    /// Injection covariance `Sigma_X` (symmetric PD).
    pub sigma_x: SymMatrix,
    /// `D^2 = inv(Sigma_X)`.
    pub d2: SymMatrix,
    /// `D = Sigma_X^{-1/2}` (PD square root of `d2`).
    pub d: SymMatrix,
    /// Potential precision `Theta* = B* inv(Sigma_X) B*`.
    pub theta_star: SymMatrix,
    /// Potential covariance `inv(Theta*) = inv(B*) Sigma_X inv(B*)`.
    pub sigma_y: SymMatrix,
    /// Off-diagonal support of `B*` (both orientations).
    pub edges: IndexSet,
    /// Augmented support: edges plus the whole diagonal.
    pub support: IndexSet,
    /// Max number of nonzero entries in any row of `B*` (diagonal included).
    pub degree_d: usize,
    /// Number of off-diagonal support pairs (both orientations), i.e. twice
    /// the edge count.
    pub s_offdiag: usize,
}

impl NetworkModel {
    /// Build from a declarative spec with identity injection covariance.
    pub fn from_spec(spec: &GraphSpec) -> Result<NetworkModel> {
        let b_star = build_b_star(spec)?;
        Self::from_b_star(b_star, None)
    }

    /// Chain (path graph) shortcut.
    pub fn chain(p: usize, edge_weight: f64, diag_margin: f64) -> Result<NetworkModel> {
        Self::from_spec(&GraphSpec::Chain { p, edge_weight, diag_margin })
    }

    /// Grid (4-neighbor lattice) shortcut.
    pub fn grid(rows: usize, cols: usize, edge_weight: f64, diag_margin: f64) -> Result<NetworkModel> {
        Self::from_spec(&GraphSpec::Grid { rows, cols, edge_weight, diag_margin })
    }

    /// Build directly from a balance matrix (must be symmetric PD), with an
    /// optional injection covariance (identity when `None`).
    pub fn from_b_star(b_star: SymMatrix, sigma_x: Option<SymMatrix>) -> Result<NetworkModel> {
        let p = b_star.dim();
        if p == 0 {
            return Err(Error::BadGraph(String::from("empty model")));
        }
        let sigma_x = sigma_x.unwrap_or_else(|| SymMatrix::identity(p));
        if sigma_x.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, got: sigma_x.dim() });
        }
        // PD requirements surface here, before any estimation starts.
        let d2 = sigma_x.sym_inv()?;
        let d = d2.sym_sqrt()?;
        let b_inv = b_star.sym_inv()?;
        if b_star.min_eigenvalue() <= 0.0 {
            return Err(Error::NotPd { min_eig: b_star.min_eigenvalue() });
        }

        let theta_star = {
            let bd2 = b_star.mul_buf(d2.as_slice());
            let buf = crate::sym::mat_mul(p, &bd2, b_star.as_slice());
            SymMatrix::from_buf_symmetrized(p, &buf)
        };
        let sigma_y = {
            let bs = b_inv.mul_buf(sigma_x.as_slice());
            let buf = crate::sym::mat_mul(p, &bs, b_inv.as_slice());
            SymMatrix::from_buf_symmetrized(p, &buf)
        };

        let edges = IndexSet::offdiag_support(&b_star, 1e-8);
        let support = edges.with_diagonal(p);
        let mut degree_d = 0;
        for i in 0..p {
            let nnz = (0..p).filter(|&j| crate::sym::abs(b_star.get(i, j)) > 1e-8).count();
            degree_d = degree_d.max(nnz);
        }
        let s_offdiag = edges.len();

        Ok(NetworkModel {
            p,
            b_star,
            sigma_x,
            d2,
            d,
            theta_star,
            sigma_y,
            edges,
            support,
            degree_d,
            s_offdiag,
        })
    }

    /// Replace the injection covariance (e.g. with a random diagonal) and
    /// recompute everything derived from it.
    pub fn with_injection_covariance(self, sigma_x: SymMatrix) -> Result<NetworkModel> {
        Self::from_b_star(self.b_star, Some(sigma_x))
    }

    /// Smallest absolute `B*` entry over the true edges — the quantity the
    /// sign-consistency threshold compares against. Errors if there are no
    /// edges.
    pub fn b_min(&self) -> Result<f64> {
        if self.edges.is_empty() {
            return Err(Error::NoEdges);
        }
        let mut m = f64::INFINITY;
        for (i, j) in self.edges.iter() {
            m = m.min(crate::sym::abs(self.b_star.get(i, j)));
        }
        Ok(m)
    }
}

/// Build the balance matrix described by a spec.
pub fn build_b_star(spec: &GraphSpec) -> Result<SymMatrix> {
    match spec {
        GraphSpec::Chain { p, edge_weight, diag_margin } => {
            let edges: Vec<(usize, usize, f64)> =
                (0..p.saturating_sub(1)).map(|i| (i, i + 1, *edge_weight)).collect();
            signed_weight_matrix(*p, &edges, *diag_margin)
        }
        GraphSpec::Grid { rows, cols, edge_weight, diag_margin } => {
            let (r, c) = (*rows, *cols);
            if r == 0 || c == 0 {
                return Err(Error::BadGraph(String::from("grid must have positive extent")));
            }
            let mut edges = Vec::new();
            for i in 0..r {
                for j in 0..c {
                    let u = i * c + j;
                    if j + 1 < c {
                        edges.push((u, u + 1, *edge_weight));
                    }
                    if i + 1 < r {
                        edges.push((u, u + c, *edge_weight));
                    }
                }
            }
            signed_weight_matrix(r * c, &edges, *diag_margin)
        }
        GraphSpec::EdgeList { p, edges, laplacian, reduce_node, diag_margin } => {
            validate_edges(*p, edges)?;
            if *laplacian {
                let l = laplacian_matrix(*p, edges);
                match reduce_node {
                    Some(k) => {
                        if *k >= *p {
                            return Err(Error::BadGraph(String::from(
                                "reduce_node out of range",
                            )));
                        }
                        Ok(delete_row_col(&l, *k))
                    }
                    None => Ok(l),
                }
            } else {
                if reduce_node.is_some() {
                    return Err(Error::BadGraph(String::from(
                        "reduce_node only applies to the laplacian construction",
                    )));
                }
                signed_weight_matrix(*p, edges, *diag_margin)
            }
        }
    }
}

/// `B[i][j] = w` on edges, `B[i][i] = sum_j |B[i][j]| + margin`: strictly
/// diagonally dominant, hence PD with margin at least `margin`.
fn signed_weight_matrix(p: usize, edges: &[(usize, usize, f64)], margin: f64) -> Result<SymMatrix> {
    if p == 0 {
        return Err(Error::BadGraph(String::from("empty model")));
    }
    if !(margin > 0.0) {
        return Err(Error::BadGraph(String::from("diag_margin must be positive")));
    }
    validate_edges(p, edges)?;
    let mut b = SymMatrix::zeros(p);
    for &(u, v, w) in edges {
        b.set(u, v, w);
    }
    for i in 0..p {
        let off: f64 = (0..p).filter(|&j| j != i).map(|j| crate::sym::abs(b.get(i, j))).sum();
        b.set(i, i, off + margin);
    }
    Ok(b)
}

/// Weighted graph Laplacian: `L[i][j] = -w`, `L[i][i] = weighted degree`.
fn laplacian_matrix(p: usize, edges: &[(usize, usize, f64)]) -> SymMatrix {
    let mut l = SymMatrix::zeros(p);
    for &(u, v, w) in edges {
        l.set(u, v, -w);
    }
    for i in 0..p {
        let deg: f64 = (0..p).filter(|&j| j != i).map(|j| -l.get(i, j)).sum();
        l.set(i, i, deg);
    }
    l
}

fn delete_row_col(a: &SymMatrix, k: usize) -> SymMatrix {
    let p = a.dim();
    let keep: Vec<usize> = (0..p).filter(|&i| i != k).collect();
    SymMatrix::from_fn(p - 1, |i, j| a.get(keep[i], keep[j]))
}

fn validate_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<()> {
    let mut seen: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(u, v, w) in edges {
        if u >= p || v >= p {
            return Err(Error::BadGraph(String::from("edge endpoint out of range")));
        }
        if u == v {
            return Err(Error::BadGraph(String::from("self-loops are not allowed")));
        }
        if !w.is_finite() || w == 0.0 {
            return Err(Error::BadGraph(String::from("edge weight must be finite and nonzero")));
        }
        seen.push((u.min(v), u.max(v)));
    }
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadGraph(String::from("duplicate edge")));
    }
    Ok(())
}
