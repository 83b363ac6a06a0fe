//! Dense brute-force oracle for the restricted Kronecker-block norm.
//!
//! The production routine never materializes `Gamma = Binv (x) Binv`; this
//! oracle does exactly that — the full `p^2 x p^2` matrix under
//! column-stacking vectorization — extracts the two blocks by explicit index
//! arithmetic, inverts the support block by Gauss-Jordan elimination with
//! partial pivoting (no shared code with the crate's linear algebra), and
//! takes the max absolute row sum of the product. Feasible only for tiny
//! `p`, which is the point: an independent answer to compare against.

use kirch_core::sym::{kron_submatrix_infnorm_product, IndexSet, SymMatrix};

/// Column-stacking vec index of entry (row, col) in a p x p matrix.
fn vec_index(p: usize, row: usize, col: usize) -> usize {
    col * p + row
}

/// Dense Gamma = Binv (x) Binv as a p^2 x p^2 row-major buffer:
/// Gamma[vec(i,j), vec(k,l)] = Binv[i][k] * Binv[j][l].
fn dense_gamma(binv: &SymMatrix) -> Vec<f64> {
    let p = binv.dim();
    let n = p * p;
    let mut g = vec![0.0; n * n];
    for i in 0..p {
        for j in 0..p {
            let r = vec_index(p, i, j);
            for k in 0..p {
                for l in 0..p {
                    let c = vec_index(p, k, l);
                    g[r * n + c] = binv.get(i, k) * binv.get(j, l);
                }
            }
        }
    }
    g
}

/// Gauss-Jordan inverse with partial pivoting.
fn gj_inverse(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        // Pivot: largest magnitude in this column at or below the diagonal.
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        assert!(m[piv * n + col].abs() > 1e-13, "oracle: singular block");
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let d = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                if f != 0.0 {
                    for j in 0..n {
                        m[r * n + j] -= f * m[col * n + j];
                        inv[r * n + j] -= f * inv[col * n + j];
                    }
                }
            }
        }
    }
    inv
}

/// The whole quantity, densely: |||Gamma[rows, cols] inv(Gamma[cols, cols])|||_inf.
fn dense_restricted_norm(binv: &SymMatrix, rows: &IndexSet, cols: &IndexSet) -> f64 {
    let p = binv.dim();
    let gamma = dense_gamma(binv);
    let n = p * p;
    let col_idx: Vec<usize> = cols.iter().map(|(i, j)| vec_index(p, i, j)).collect();
    let row_idx: Vec<usize> = rows.iter().map(|(i, j)| vec_index(p, i, j)).collect();
    let ne = col_idx.len();

    let mut block_ee = vec![0.0; ne * ne];
    for (a, &r) in col_idx.iter().enumerate() {
        for (b, &c) in col_idx.iter().enumerate() {
            block_ee[a * ne + b] = gamma[r * n + c];
        }
    }
    let inv_ee = gj_inverse(ne, &block_ee);

    let mut worst: f64 = 0.0;
    for &r in &row_idx {
        let mut row_sum = 0.0;
        for b in 0..ne {
            let mut s = 0.0;
            for (a, &c) in col_idx.iter().enumerate() {
                s += gamma[r * n + c] * inv_ee[a * ne + b];
            }
            row_sum += s.abs();
        }
        worst = worst.max(row_sum);
    }
    worst
}

/// Deterministic xorshift (kept independent of the crate's RNG stack).
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        (x.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random diagonally dominant symmetric PD matrix with a random sparse
/// support (each edge kept with probability ~1/2, signed weights).
fn random_sparse_pd(p: usize, rng: &mut XorShift) -> SymMatrix {
    let mut b = SymMatrix::zeros(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.next_f64() < 0.5 {
                let w = 0.2 + 0.8 * rng.next_f64();
                let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
                b.set(i, j, sign * w);
            }
        }
    }
    for i in 0..p {
        let off: f64 = (0..p).filter(|&j| j != i).map(|j| b.get(i, j).abs()).sum();
        b.set(i, i, off + 0.5 + rng.next_f64());
    }
    b
}

#[test]
fn restricted_kron_norm_matches_dense_brute_force() {
    let mut rng = XorShift(0xA0761D6478BD642F);
    for p in 3..=6 {
        for rep in 0..4 {
            let b = random_sparse_pd(p, &mut rng);
            let binv = b.sym_inv().unwrap();
            let edges = IndexSet::offdiag_support(&b, 1e-8);
            let e = edges.with_diagonal(p);
            let ec = e.complement(p);
            if ec.is_empty() {
                continue; // dense support: nothing off-support to measure
            }
            let fast = kron_submatrix_infnorm_product(&binv, &ec, &e).unwrap();
            let dense = dense_restricted_norm(&binv, &ec, &e);
            assert!(
                (fast - dense).abs() <= 1e-10,
                "p={p} rep={rep}: fast {fast} vs dense {dense}"
            );
        }
    }
}

#[test]
fn restricted_kron_norm_matches_dense_on_structured_graphs() {
    // Chains and a 2x3 grid with the exact fixture construction, since those
    // are what the diagnostics run on.
    use kirch_core::graph::NetworkModel;
    for model in [
        NetworkModel::chain(3, 1.0, 1.0).unwrap(),
        NetworkModel::chain(5, 1.0, 1.0).unwrap(),
        NetworkModel::chain(6, 0.7, 1.3).unwrap(),
        NetworkModel::grid(2, 3, 1.0, 1.0).unwrap(),
    ] {
        let binv = model.b_star.sym_inv().unwrap();
        let e = &model.support;
        let ec = e.complement(model.p);
        let fast = kron_submatrix_infnorm_product(&binv, &ec, e).unwrap();
        let dense = dense_restricted_norm(&binv, &ec, e);
        assert!(
            (fast - dense).abs() <= 1e-10,
            "p={}: fast {fast} vs dense {dense}",
            model.p
        );
    }
}
