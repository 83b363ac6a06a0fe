//! Seeded Monte-Carlo experiment harness.
//!
//! One parallel work unit is a `(sample size, trial)` pair: the samples are
//! drawn once per pair and shared by every estimator, so comparisons between
//! estimators are paired. Every per-trial seed derives deterministically from
//! the base seed, which makes whole runs reproducible bit-for-bit regardless
//! of thread count (rows are sorted before writing).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use kirch_core::baseline::{glasso, sqrt_support, two_hop_support};
use kirch_core::graph::NetworkModel;
use kirch_core::sample::{draw_samples, SamplingSpec};
use kirch_core::score::{score, TrialScore};
use kirch_core::solver::{default_lambda, fit_balance, SolverConfig, SolverResult};
use kirch_core::sym::{IndexSet, SymMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EstimatorKind, ExperimentSpec, LambdaRule};
use crate::error::{io_err, CliError, Result};
use crate::io::fmt_float;

/// Trials per (candidate, sample size) cell in a pilot sweep.
const PILOT_TRIALS: usize = 20;
/// Trial-index offset that keeps pilot seeds disjoint from main-run seeds.
const PILOT_TRIAL_OFFSET: u64 = 1 << 32;

/// One estimator run on one draw.
#[derive(Clone, Debug)]
pub struct TrialRow {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub score: TrialScore,
    pub iterations: usize,
    pub converged: bool,
    /// Final certificate bound from the solver (not a CSV column; the
    /// acceptance checks read it).
    pub kkt_residual: f64,
    pub wall_ms: u64,
}

/// Per-(estimator, n) summary.
#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub trials: usize,
    pub converged_trials: usize,
    /// Mean of `exact_recovery` over all trials.
    pub success_prob: f64,
    /// Mean of `sign_consistent` over all trials.
    pub sign_prob: f64,
    /// Error means over converged trials only; `null` if none converged.
    pub mean_err_inf: Option<f64>,
    pub mean_err_fro: Option<f64>,
    pub mean_err_op2: Option<f64>,
    /// Support-quality means over converged trials only; these carry the
    /// story when exact recovery is out of reach (meshed, ill-conditioned
    /// fixtures recover most edges long before they recover all of them).
    pub mean_precision: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_iterations: f64,
}

/// Everything a sweep produces.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// Sorted by (estimator, n, trial).
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
    /// Resolved lambda scale per estimator (pilot winner or the configured
    /// constant).
    pub tuned_lambda: BTreeMap<EstimatorKind, f64>,
    pub spec: ExperimentSpec,
}

/// Fitted slope of `ln(mean error)` against `ln(n)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateReport {
    pub slope: f64,
    pub r2: f64,
    /// Grid points that contributed (had at least one converged trial).
    pub points: usize,
}

/// splitmix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial RNG seed.
pub fn trial_seed(base_seed: u64, n: usize, trial: u64) -> u64 {
    base_seed.wrapping_add(mix(mix(n as u64) ^ trial))
}

/// Run a full sweep. `threads = 0` uses all cores.
pub fn run_experiment(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    let model = spec.model.build()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("could not build thread pool: {e}")))?;
    pool.install(|| run_on_pool(spec, &model))
}

fn run_on_pool(spec: &ExperimentSpec, model: &NetworkModel) -> Result<ExperimentResult> {
    let mut tuned = BTreeMap::new();
    for &est in &spec.estimators {
        let c = match spec.lambda_rule(est) {
            LambdaRule::Constant(c) => c,
            LambdaRule::Pilot(candidates) => pilot_tune(spec, model, est, &candidates)?,
        };
        tuned.insert(est, c);
    }

    let jobs: Vec<(usize, usize)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| (0..spec.trials).map(move |t| (n, t)))
        .collect();
    let nested: Vec<Vec<TrialRow>> = jobs
        .par_iter()
        .map(|&(n, trial)| run_trial(spec, model, &tuned, n, trial))
        .collect::<Result<_>>()?;

    let mut rows: Vec<TrialRow> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.estimator, r.n, r.trial));
    let aggregates = aggregate(spec, &rows);
    Ok(ExperimentResult { rows, aggregates, tuned_lambda: tuned, spec: spec.clone() })
}

/// One draw, every estimator.
fn run_trial(
    spec: &ExperimentSpec,
    model: &NetworkModel,
    tuned: &BTreeMap<EstimatorKind, f64>,
    n: usize,
    trial: usize,
) -> Result<Vec<TrialRow>> {
    let seed = trial_seed(spec.base_seed, n, trial as u64);
    let samples = draw_samples(model, &SamplingSpec { n, noise: spec.noise, seed })?;
    let mut rows = Vec::with_capacity(spec.estimators.len());
    for &est in &spec.estimators {
        let lambda = default_lambda(model.p, n, tuned[&est]);
        let start = spec.record_wall_time.then(Instant::now);
        let (fit, b_hat, support_hat) =
            run_estimator(est, model, &samples.s_cov, lambda, spec)?;
        let wall_ms = start.map_or(0, |t| t.elapsed().as_millis() as u64);
        let trial_score = score(&b_hat, model, &support_hat)?;
        rows.push(TrialRow {
            estimator: est,
            n,
            trial,
            seed,
            score: trial_score,
            iterations: fit.iterations,
            converged: fit.converged,
            kkt_residual: fit.kkt_residual,
            wall_ms,
        });
    }
    Ok(rows)
}

/// Fit one estimator and read off its estimate and claimed support.
fn run_estimator(
    est: EstimatorKind,
    model: &NetworkModel,
    s_cov: &SymMatrix,
    lambda: f64,
    spec: &ExperimentSpec,
) -> Result<(SolverResult, SymMatrix, IndexSet)> {
    let config = spec.solver.apply(SolverConfig::with_lambda(lambda));
    match est {
        EstimatorKind::L1Mle => {
            let fit = fit_balance(s_cov, &model.d2, &config)?;
            let support = IndexSet::offdiag_support(&fit.estimate, spec.support_eps);
            let b_hat = fit.estimate.clone();
            Ok((fit, b_hat, support))
        }
        EstimatorKind::GlassoSr => {
            let fit = glasso(s_cov, &config)?;
            let (root, support) = sqrt_support(&fit.estimate, spec.sr_threshold)?;
            Ok((fit, root, support))
        }
        EstimatorKind::Glasso2hr => {
            let fit = glasso(s_cov, &config)?;
            let support = two_hop_support(&fit.estimate, spec.sr_threshold);
            let root = fit.estimate.sym_sqrt()?;
            Ok((fit, root, support))
        }
    }
}

/// Pick the best lambda scale from `candidates` on a reduced sweep: the
/// middle third of the sample-size grid, `PILOT_TRIALS` fresh draws per
/// grid point (seeds disjoint from the main run, shared across candidates
/// so the comparison is paired). Best = highest mean exact recovery, ties
/// broken by smaller mean sup-norm error, then by smaller scale.
pub(crate) fn pilot_tune(
    spec: &ExperimentSpec,
    model: &NetworkModel,
    est: EstimatorKind,
    candidates: &[f64],
) -> Result<f64> {
    let len = spec.n_grid.len();
    let lo = len / 3;
    let hi = ((2 * len) / 3).max(lo + 1);
    let pilot_ns = &spec.n_grid[lo..hi];

    let mut jobs = Vec::new();
    for ci in 0..candidates.len() {
        for &n in pilot_ns {
            for t in 0..PILOT_TRIALS {
                jobs.push((ci, n, t));
            }
        }
    }
    let outcomes: Vec<(usize, bool, bool, f64)> = jobs
        .par_iter()
        .map(|&(ci, n, t)| -> Result<(usize, bool, bool, f64)> {
            let seed = trial_seed(spec.base_seed, n, PILOT_TRIAL_OFFSET + t as u64);
            let samples = draw_samples(model, &SamplingSpec { n, noise: spec.noise, seed })?;
            let lambda = default_lambda(model.p, n, candidates[ci]);
            let (fit, b_hat, support_hat) =
                run_estimator(est, model, &samples.s_cov, lambda, spec)?;
            let sc = score(&b_hat, model, &support_hat)?;
            Ok((ci, sc.exact_recovery, fit.converged, sc.err_inf))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, f64, f64)> = None; // (success, -mean_err, -c), maximized
    for (ci, &c) in candidates.iter().enumerate() {
        let cell: Vec<_> = outcomes.iter().filter(|o| o.0 == ci).collect();
        let total = cell.len() as f64;
        let success = cell.iter().filter(|o| o.1).count() as f64 / total;
        let converged: Vec<f64> = cell.iter().filter(|o| o.2).map(|o| o.3).collect();
        let mean_err = if converged.is_empty() {
            f64::INFINITY
        } else {
            converged.iter().sum::<f64>() / converged.len() as f64
        };
        let key = (success, -mean_err, -c);
        if best.is_none_or(|b| key > b) {
            best = Some(key);
        }
    }
    Ok(-best.expect("candidates validated nonempty").2)
}

fn aggregate(spec: &ExperimentSpec, rows: &[TrialRow]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &est in &spec.estimators {
        for &n in &spec.n_grid {
            let grp: Vec<&TrialRow> =
                rows.iter().filter(|r| r.estimator == est && r.n == n).collect();
            let total = grp.len() as f64;
            let conv: Vec<&&TrialRow> = grp.iter().filter(|r| r.converged).collect();
            let mean_over_conv = |f: &dyn Fn(&TrialRow) -> f64| -> Option<f64> {
                if conv.is_empty() {
                    None
                } else {
                    Some(conv.iter().map(|r| f(r)).sum::<f64>() / conv.len() as f64)
                }
            };
            out.push(Aggregate {
                estimator: est,
                n,
                trials: grp.len(),
                converged_trials: conv.len(),
                success_prob: grp.iter().filter(|r| r.score.exact_recovery).count() as f64
                    / total,
                sign_prob: grp.iter().filter(|r| r.score.sign_consistent).count() as f64
                    / total,
                mean_err_inf: mean_over_conv(&|r| r.score.err_inf),
                mean_err_fro: mean_over_conv(&|r| r.score.err_fro),
                mean_err_op2: mean_over_conv(&|r| r.score.err_op2),
                mean_precision: mean_over_conv(&|r| r.score.support_precision),
                mean_recall: mean_over_conv(&|r| r.score.support_recall),
                mean_iterations: grp.iter().map(|r| r.iterations as f64).sum::<f64>() / total,
            });
        }
    }
    out
}

/// Least-squares slope of `ln(mean selected error over converged trials)`
/// against `ln(n)` for one estimator. Needs three contributing grid points.
pub fn rate_check(
    rows: &[TrialRow],
    estimator: EstimatorKind,
    select: impl Fn(&TrialRow) -> f64,
) -> Result<RateReport> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut ns: Vec<usize> = rows.iter().filter(|r| r.estimator == estimator).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.estimator == estimator && r.n == n && r.converged)
            .map(&select)
            .collect();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if mean > 0.0 {
            points.push(((n as f64).ln(), mean.ln()));
        }
    }
    if points.len() < 3 {
        return Err(CliError::InsufficientData(format!(
            "rate check needs 3 usable grid points, got {}",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateReport { slope, r2, points: points.len() })
}

/// Exact column set of a results table.
pub const RESULTS_HEADER: &str = "estimator,n,trial,seed,exact_recovery,sign_consistent,\
err_inf,err_fro,err_op2,precision,recall,iterations,converged,wall_ms";

/// Render the per-trial table (the format `write_results_csv` writes).
pub fn results_csv_text(rows: &[TrialRow]) -> String {
    let mut text = String::with_capacity(128 * (rows.len() + 1));
    text.push_str(RESULTS_HEADER);
    text.push('\n');
    for r in rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.n,
            r.trial,
            r.seed,
            r.score.exact_recovery,
            r.score.sign_consistent,
            fmt_float(r.score.err_inf),
            fmt_float(r.score.err_fro),
            fmt_float(r.score.err_op2),
            fmt_float(r.score.support_precision),
            fmt_float(r.score.support_recall),
            r.iterations,
            r.converged,
            r.wall_ms,
        )
        .expect("string write cannot fail");
    }
    text
}

/// Write the per-trial table.
pub fn write_results_csv(path: &Path, rows: &[TrialRow]) -> Result<()> {
    std::fs::write(path, results_csv_text(rows)).map_err(io_err(path))
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    spec: &'a ExperimentSpec,
    tuned_lambda_constants: &'a BTreeMap<EstimatorKind, f64>,
    aggregates: &'a [Aggregate],
}

/// Write the aggregate summary (spec echo, resolved lambda scales, per-point
/// aggregates) as pretty JSON.
pub fn write_aggregates_json(path: &Path, result: &ExperimentResult) -> Result<()> {
    let doc = SummaryDoc {
        spec: &result.spec,
        tuned_lambda_constants: &result.tuned_lambda,
        aggregates: &result.aggregates,
    };
    crate::io::write_json(path, &doc)
}
