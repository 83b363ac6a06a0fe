//! Scoring estimates against the ground truth
//!
//! One estimate yields one [`TrialScore`]: support-recovery verdicts
//! (exact recovery, sign consistency, precision/recall) plus the three
//! error norms the finite-sample theory bounds — entrywise max, Frobenius,
//! and spectral. Support comparison is symmetric and diagonal-blind: the
//! diagonal is always present in both truth and estimate, so only
//! off-diagonal pairs carry structural information.

use crate::graph::NetworkModel;
use crate::sym::{abs, IndexSet, SymMatrix};
use crate::{Error, Result};

/// Verdicts and error norms for a single estimate.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrialScore {
    /// Off-diagonal support of the estimate equals the true edge set
    /// exactly (no false positives, no false negatives).
    pub exact_recovery: bool,
    /// Exact recovery *and* matching sign on every true edge.
    pub sign_consistent: bool,
    /// `max_ij |b_hat - B*|`.
    pub err_inf: f64,
    /// Frobenius norm of the difference.
    pub err_fro: f64,
    /// Spectral norm of the difference.
    pub err_op2: f64,
    /// Fraction of claimed edges that are real (1.0 when nothing claimed).
    pub support_precision: f64,
    /// Fraction of real edges that were claimed (1.0 when no real edges).
    pub support_recall: f64,
}

/// Score `b_hat` with claimed support `support_hat` against the model.
///
/// `support_hat` may include diagonal pairs; they are ignored. Pair order
/// is irrelevant.
pub fn score(
    b_hat: &SymMatrix,
    model: &NetworkModel,
    support_hat: &IndexSet,
) -> Result<TrialScore> {
    if b_hat.dim() != model.p {
        return Err(Error::DimensionMismatch { expected: model.p, got: b_hat.dim() });
    }

    let claimed = IndexSet::from_pairs(support_hat.iter().filter(|&(i, j)| i != j));
    let truth = &model.edges;
    let tp = claimed.intersection_len(truth);

    let support_precision = if claimed.is_empty() { 1.0 } else { tp as f64 / claimed.len() as f64 };
    let support_recall = if truth.is_empty() { 1.0 } else { tp as f64 / truth.len() as f64 };
    let exact_recovery = tp == claimed.len() && tp == truth.len();

    let mut sign_consistent = exact_recovery;
    if sign_consistent {
        for (i, j) in truth.iter() {
            let sign_hat = sign(b_hat.get(i, j));
            if sign_hat == 0 || sign_hat != sign(model.b_star.get(i, j)) {
                sign_consistent = false;
                break;
            }
        }
    }

    let diff = b_hat.sub(&model.b_star);
    let norms = diff.norms();
    Ok(TrialScore {
        exact_recovery,
        sign_consistent,
        err_inf: norms.elem_max,
        err_fro: norms.fro,
        err_op2: norms.op2,
        support_precision,
        support_recall,
    })
}

fn sign(x: f64) -> i8 {
    if abs(x) < 1e-300 {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(p: usize) -> NetworkModel {
        NetworkModel::chain(p, 1.0, 1.0).unwrap()
    }

    #[test]
    fn truth_scores_perfectly() {
        let m = chain(5);
        let s = score(&m.b_star, &m, &m.support).unwrap();
        assert!(s.exact_recovery && s.sign_consistent);
        assert_eq!(s.err_inf, 0.0);
        assert_eq!(s.err_fro, 0.0);
        assert!(s.err_op2.abs() < 1e-12);
        assert_eq!(s.support_precision, 1.0);
        assert_eq!(s.support_recall, 1.0);
    }

    #[test]
    fn dropped_edge_breaks_recall_not_precision() {
        let m = chain(5);
        let mut b = m.b_star.clone();
        b.set(0, 1, 0.0);
        let claimed = IndexSet::offdiag_support(&b, 1e-8);
        let s = score(&b, &m, &claimed).unwrap();
        assert!(!s.exact_recovery && !s.sign_consistent);
        assert_eq!(s.support_precision, 1.0);
        assert!((s.support_recall - 3.0 / 4.0).abs() < 1e-12);
        assert_eq!(s.err_inf, 1.0);
    }

    #[test]
    fn diagonal_perturbation_keeps_exact_recovery() {
        let m = chain(4);
        let mut b = m.b_star.clone();
        b.set(0, 0, b.get(0, 0) + 0.1);
        let s = score(&b, &m, &m.support).unwrap();
        assert!(s.exact_recovery && s.sign_consistent);
        assert!((s.err_inf - 0.1).abs() < 1e-12);
        assert!((s.err_fro - 0.1).abs() < 1e-12);
        assert!((s.err_op2 - 0.1).abs() < 1e-9);
    }

    #[test]
    fn flipped_edge_sign_defeats_sign_consistency_only() {
        let m = chain(4);
        let mut b = m.b_star.clone();
        b.set(1, 2, -b.get(1, 2));
        let s = score(&b, &m, &m.support).unwrap();
        assert!(s.exact_recovery);
        assert!(!s.sign_consistent);
    }

    #[test]
    fn spurious_edge_breaks_precision_not_recall() {
        let m = chain(5);
        let mut b = m.b_star.clone();
        b.set(0, 4, 0.2);
        let claimed = IndexSet::offdiag_support(&b, 1e-8);
        let s = score(&b, &m, &claimed).unwrap();
        assert!(!s.exact_recovery);
        assert_eq!(s.support_recall, 1.0);
        assert!((s.support_precision - 8.0 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn pair_order_does_not_matter() {
        let m = chain(4);
        let forward = IndexSet::from_pairs([(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)]);
        let shuffled = IndexSet::from_pairs([(3, 2), (1, 0), (2, 3), (0, 1), (2, 1), (1, 2)]);
        let a = score(&m.b_star, &m, &forward).unwrap();
        let b = score(&m.b_star, &m, &shuffled).unwrap();
        assert_eq!(a.exact_recovery, b.exact_recovery);
        assert_eq!(a.support_precision, b.support_precision);
    }

    #[test]
    fn edgeless_truth_and_empty_claim_score_perfect() {
        let m = NetworkModel::from_b_star(SymMatrix::identity(3), None).unwrap();
        let s = score(&m.b_star, &m, &IndexSet::empty()).unwrap();
        assert!(s.exact_recovery);
        assert_eq!(s.support_precision, 1.0);
        assert_eq!(s.support_recall, 1.0);
    }

    #[test]
    fn norm_chain_holds_for_support_confined_differences() {
        // For a difference matrix confined to the augmented support with
        // max row degree d: op2 <= fro, op2 <= d * inf,
        // fro <= sqrt(s + p) * inf.
        let m = chain(6);
        let mut b = m.b_star.clone();
        // Perturb every support entry by distinct amounts.
        let mut bump = 0.01;
        for (i, j) in m.support.iter() {
            if i <= j {
                b.set(i, j, b.get(i, j) + bump);
                bump += 0.003;
            }
        }
        let s = score(&b, &m, &m.support).unwrap();
        let d = m.degree_d as f64;
        let sp = (m.s_offdiag + m.p) as f64;
        assert!(s.err_op2 <= s.err_fro + 1e-12);
        assert!(s.err_op2 <= d * s.err_inf + 1e-12);
        assert!(s.err_fro <= sp.sqrt() * s.err_inf + 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = chain(4);
        let wrong = SymMatrix::identity(5);
        assert!(matches!(
            score(&wrong, &m, &m.support),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
    }
}
