//! Brute-force oracles for the regularized estimators.
//!
//! Nothing in this file goes through the crate's linear algebra or solver
//! internals: the 2x2 objectives are written out in scalar closed form and
//! minimized by multi-stage grid search (legitimate because both objectives
//! are strictly convex on the PD cone, so a coarse-to-fine search cannot get
//! trapped), and the gradient check uses central finite differences of the
//! public objective function. The solver has to match these, not the other
//! way around.

use kirch_core::baseline;
use kirch_core::solver::{self, SolverConfig};
use kirch_core::sym::SymMatrix;

/// Deterministic xorshift so the oracle does not share RNG machinery with
/// the crate under test.
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        // xorshift64* then map the top 53 bits to [0, 1).
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        let bits = x.wrapping_mul(0x2545F4914F6CDD1D) >> 11;
        bits as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// A random 2x2 estimation instance: PD sample covariance and diagonal
/// injection precision.
struct Instance2 {
    s: [f64; 3],  // s11, s12, s22
    d2: [f64; 2], // diagonal of D^2
}

fn random_instance(rng: &mut XorShift) -> Instance2 {
    // PD by construction: positive diagonal, off-diagonal below the
    // geometric mean.
    let s11 = rng.in_range(0.4, 2.0);
    let s22 = rng.in_range(0.4, 2.0);
    let s12 = rng.in_range(-0.8, 0.8) * (s11 * s22).sqrt() * 0.8;
    let d2 = [rng.in_range(0.5, 2.0), rng.in_range(0.5, 2.0)];
    Instance2 { s: [s11, s12, s22], d2 }
}

/// Closed-form balance-MLE objective at B = [[b11, b12], [b12, b22]]:
/// tr(D^2 B S B) - 2 ln det B + lambda * (|b12| + |b21|).
/// Returns +inf outside the PD cone.
fn mle_obj(inst: &Instance2, lambda: f64, b: [f64; 3]) -> f64 {
    let [b11, b12, b22] = b;
    let det = b11 * b22 - b12 * b12;
    if b11 <= 0.0 || det <= 0.0 {
        return f64::INFINITY;
    }
    let [s11, s12, s22] = inst.s;
    // M = B S B, needed only on the diagonal since D^2 is diagonal.
    // Row 1 of BS: (b11 s11 + b12 s12, b11 s12 + b12 s22)
    let bs11 = b11 * s11 + b12 * s12;
    let bs12 = b11 * s12 + b12 * s22;
    let bs21 = b12 * s11 + b22 * s12;
    let bs22 = b12 * s12 + b22 * s22;
    let m11 = bs11 * b11 + bs12 * b12;
    let m22 = bs21 * b12 + bs22 * b22;
    inst.d2[0] * m11 + inst.d2[1] * m22 - 2.0 * det.ln() + 2.0 * lambda * b12.abs()
}

/// Closed-form graphical-lasso objective at Theta:
/// tr(S Theta) - ln det Theta + lambda * (|t12| + |t21|).
fn glasso_obj(inst: &Instance2, lambda: f64, t: [f64; 3]) -> f64 {
    let [t11, t12, t22] = t;
    let det = t11 * t22 - t12 * t12;
    if t11 <= 0.0 || det <= 0.0 {
        return f64::INFINITY;
    }
    let [s11, s12, s22] = inst.s;
    s11 * t11 + 2.0 * s12 * t12 + s22 * t22 - det.ln() + 2.0 * lambda * t12.abs()
}

/// Multi-stage grid search over the three free entries. Stages shrink the
/// box around the running optimum down to a 1e-5 step; each refinement box
/// spans +-3 previous steps so the true optimum cannot be clipped away.
fn grid_search(obj: impl Fn([f64; 3]) -> f64) -> ([f64; 3], f64) {
    let mut best = [1.0, 0.0, 1.0];
    let mut best_val = obj(best);

    // Stage 0: coarse scan of a generous box.
    let coarse = 0.05;
    let mut v = [0.0; 3];
    let steps_diag = (4.0 / coarse) as usize;
    let steps_off = (4.0 / coarse) as usize + 1;
    for i in 0..steps_diag {
        v[0] = coarse * (i + 1) as f64;
        for k in 0..steps_diag {
            v[2] = coarse * (k + 1) as f64;
            for j in 0..steps_off {
                v[1] = -2.0 + coarse * j as f64;
                let f = obj(v);
                if f < best_val {
                    best_val = f;
                    best = v;
                }
            }
        }
    }

    assert!(
        best[0] > coarse && best[0] < 4.0 - coarse && best[2] > coarse && best[2] < 4.0 - coarse,
        "coarse optimum on the search-box boundary; widen the box"
    );
    assert!(best[1].abs() < 2.0 - coarse, "coarse off-diagonal on the boundary");

    // Refinement stages down to a 1e-5 step, each box spanning many previous
    // steps so the argmin of the previous stage cannot clip the true one.
    for &(half, step) in
        &[(0.5, 1e-2), (0.1, 2e-3), (0.02, 4e-4), (4e-3, 8e-5), (8e-4, 1e-5)]
    {
        let lo = [best[0] - half, best[1] - half, best[2] - half];
        let k_max = (2.0 * half / step) as usize + 1;
        for i in 0..=k_max {
            v[0] = lo[0] + step * i as f64;
            for j in 0..=k_max {
                v[1] = lo[1] + step * j as f64;
                for k in 0..=k_max {
                    v[2] = lo[2] + step * k as f64;
                    let f = obj(v);
                    if f < best_val {
                        best_val = f;
                        best = v;
                    }
                }
            }
        }
    }
    (best, best_val)
}

fn sym2(v: [f64; 3]) -> SymMatrix {
    SymMatrix::from_rows(2, &[v[0], v[1], v[1], v[2]]).unwrap()
}

#[test]
fn mle_solver_matches_grid_search_on_random_2x2_instances() {
    let mut rng = XorShift(0x9E3779B97F4A7C15);
    for trial in 0..10 {
        let inst = random_instance(&mut rng);
        let lambda = rng.in_range(0.02, 0.3);
        let t0 = std::time::Instant::now();
        let (b_oracle, f_oracle) = grid_search(|b| mle_obj(&inst, lambda, b));
        let oracle_time = t0.elapsed();

        let s = sym2([inst.s[0], inst.s[1], inst.s[2]]);
        let d2 = SymMatrix::from_diag(&inst.d2);
        let cfg = SolverConfig::with_lambda(lambda);
        let res = solver::fit_balance(&s, &d2, &cfg).unwrap();
        assert!(res.converged, "trial {trial}: solver did not converge");

        let f_solver = mle_obj(
            &inst,
            lambda,
            [res.estimate.get(0, 0), res.estimate.get(0, 1), res.estimate.get(1, 1)],
        );
        assert!(
            (f_solver - f_oracle).abs() <= 1e-6,
            "trial {trial}: objective gap {} (solver {f_solver}, oracle {f_oracle})",
            (f_solver - f_oracle).abs()
        );
        for (a, b) in [
            (res.estimate.get(0, 0), b_oracle[0]),
            (res.estimate.get(0, 1), b_oracle[1]),
            (res.estimate.get(1, 1), b_oracle[2]),
        ] {
            assert!((a - b).abs() <= 1e-3, "trial {trial}: entry gap {} > 1e-3", (a - b).abs());
        }
        // The crate's objective function must agree with the closed form.
        let api_obj = solver::objective(&res.estimate, &s, &d2, lambda).unwrap();
        assert!((api_obj - f_solver).abs() < 1e-10);

        assert!(oracle_time.as_secs_f64() < 1.0, "oracle too slow: {oracle_time:?}");
    }
}

#[test]
fn glasso_matches_grid_search_on_random_2x2_instances() {
    let mut rng = XorShift(0xD1B54A32D192ED03);
    for trial in 0..10 {
        let inst = random_instance(&mut rng);
        let lambda = rng.in_range(0.02, 0.3);
        let (t_oracle, f_oracle) = grid_search(|t| glasso_obj(&inst, lambda, t));

        let s = sym2([inst.s[0], inst.s[1], inst.s[2]]);
        let cfg = SolverConfig::with_lambda(lambda);
        let res = baseline::glasso(&s, &cfg).unwrap();
        assert!(res.converged, "trial {trial}: glasso did not converge");

        let f_solver = glasso_obj(
            &inst,
            lambda,
            [res.estimate.get(0, 0), res.estimate.get(0, 1), res.estimate.get(1, 1)],
        );
        assert!(
            (f_solver - f_oracle).abs() <= 1e-6,
            "trial {trial}: objective gap {}",
            (f_solver - f_oracle).abs()
        );
        for (a, b) in [
            (res.estimate.get(0, 0), t_oracle[0]),
            (res.estimate.get(0, 1), t_oracle[1]),
            (res.estimate.get(1, 1), t_oracle[2]),
        ] {
            assert!((a - b).abs() <= 1e-3, "trial {trial}: entry gap {}", (a - b).abs());
        }
    }
}

/// Central finite differences of the public objective (at lambda = 0, where
/// it is smooth) against the analytic gradient, along symmetric coordinate
/// directions: d/dh f(B + h U_ij) = grad_ij * (2 - delta_ij) for
/// U_ij = E_ij + E_ji (i < j) or E_ii.
#[test]
fn smooth_gradient_matches_finite_differences() {
    let mut rng = XorShift(0x853C49E6748FEA9B);
    let p = 5;
    for trial in 0..5 {
        // Random PD S and B (diagonally dominant), random diagonal D^2.
        let mut s = SymMatrix::zeros(p);
        let mut b = SymMatrix::zeros(p);
        for i in 0..p {
            for j in (i + 1)..p {
                s.set(i, j, rng.in_range(-0.4, 0.4));
                b.set(i, j, rng.in_range(-0.4, 0.4));
            }
        }
        for i in 0..p {
            let srow: f64 = (0..p).filter(|&j| j != i).map(|j| s.get(i, j).abs()).sum();
            let brow: f64 = (0..p).filter(|&j| j != i).map(|j| b.get(i, j).abs()).sum();
            s.set(i, i, srow + rng.in_range(0.5, 1.5));
            b.set(i, i, brow + rng.in_range(0.5, 1.5));
        }
        let d2 = SymMatrix::from_diag(
            &(0..p).map(|_| rng.in_range(0.5, 2.0)).collect::<Vec<_>>(),
        );

        let grad = solver::smooth_gradient(&b, &s, &d2).unwrap();
        let h = 1e-5;
        for i in 0..p {
            for j in i..p {
                let mut plus = b.clone();
                plus.set(i, j, b.get(i, j) + h);
                let mut minus = b.clone();
                minus.set(i, j, b.get(i, j) - h);
                let fd = (solver::objective(&plus, &s, &d2, 0.0).unwrap()
                    - solver::objective(&minus, &s, &d2, 0.0).unwrap())
                    / (2.0 * h);
                let expect = if i == j { grad.get(i, i) } else { 2.0 * grad.get(i, j) };
                let denom = expect.abs().max(1.0);
                assert!(
                    ((fd - expect) / denom).abs() < 1e-6,
                    "trial {trial} entry ({i},{j}): fd {fd} vs analytic {expect}"
                );
            }
        }
    }
}
