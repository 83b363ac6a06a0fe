//! Command implementations: merge config and flags, call the core, write
//! the output files.

use std::path::{Path, PathBuf};

use kirch_core::diag::{lemma4_radius, pdw_dual_check, theorem1_constants, DiagnosticsReport, Lemma4Report};
use kirch_core::sample::{draw_samples, noise_deviation, sample_covariance, NoiseKind, SamplingSpec};
use kirch_core::solver::{default_lambda, fit_balance, SolverConfig};
use kirch_core::sym::{IndexSet, SymMatrix};
use serde::Serialize;

use crate::cli::{Cli, Command};
use crate::config::{
    self, DiagnoseConfig, EstimateConfig, ExperimentSpec, GenerateConfig, ModelConfig,
    SampleConfig,
};
use crate::error::{io_err, CliError, Result};
use crate::harness;
use crate::io;

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out).map_err(io_err(&cli.out))?;
    let out = cli.out;
    let config_path = cli.config;
    match cli.command {
        Command::Generate { model } => {
            let cfg: GenerateConfig = load_or_default(config_path.as_deref())?;
            let model_cfg = model.resolve(cfg.graph, cfg.covariance)?;
            cmd_generate(&out, &model_cfg)
        }
        Command::Sample { model, n, noise } => {
            let cfg: SampleConfig = load_or_default(config_path.as_deref())?;
            let model_cfg = model.resolve(cfg.graph, cfg.covariance)?;
            let n = n.or(cfg.n).ok_or_else(|| usage("sample needs --n"))?;
            let noise = noise.resolve(cfg.noise);
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            cmd_sample(&out, &model_cfg, n, noise, seed)
        }
        Command::Estimate { model, samples, sigma_x, n, noise, lambda, lambda_c, support_eps } => {
            let cfg: EstimateConfig = load_or_default(config_path.as_deref())?;
            let input = if let Some(path) = samples.or(cfg.samples.clone()) {
                EstimateInput::File { samples: path, sigma_x: sigma_x.or(cfg.sigma_x.clone()) }
            } else {
                let model_cfg = model.resolve(cfg.graph.clone(), cfg.covariance.clone())?;
                EstimateInput::Draw {
                    model: model_cfg,
                    n: n.or(cfg.n).ok_or_else(|| usage("estimate needs --n or --samples"))?,
                    noise: noise.resolve(cfg.noise),
                    seed: cli.seed.or(cfg.seed).unwrap_or(0),
                }
            };
            let choice = LambdaChoice {
                absolute: lambda.or(cfg.lambda),
                scale: lambda_c.or(cfg.lambda_c),
            };
            let support_eps = support_eps.or(cfg.support_eps).unwrap_or(1e-8);
            let overrides = cfg.solver.unwrap_or_default();
            cmd_estimate(&out, input, choice, support_eps, &overrides)
        }
        Command::Diagnose { model, sigma, tau, n, noise, lambda, lambda_c } => {
            let cfg: DiagnoseConfig = load_or_default(config_path.as_deref())?;
            let model_cfg = model.resolve(cfg.graph, cfg.covariance)?;
            let empirical = n.or(cfg.n).map(|n| EmpiricalRequest {
                n,
                noise: noise.resolve(cfg.noise),
                seed: cli.seed.or(cfg.seed).unwrap_or(0),
                lambda: LambdaChoice {
                    absolute: lambda.or(cfg.lambda),
                    scale: lambda_c.or(cfg.lambda_c),
                },
            });
            cmd_diagnose(
                &out,
                &model_cfg,
                sigma.or(cfg.sigma).unwrap_or(1.0),
                tau.or(cfg.tau).unwrap_or(2.5),
                empirical,
            )
        }
        Command::Experiment => {
            let path = config_path
                .as_deref()
                .ok_or_else(|| usage("experiment needs --config FILE"))?;
            let mut spec: ExperimentSpec = config::load_json(path)?;
            if let Some(seed) = cli.seed {
                spec.base_seed = seed;
            }
            cmd_experiment(&out, &spec, cli.threads)
        }
    }
}

fn usage(message: &str) -> CliError {
    CliError::Usage(String::from(message))
}

fn load_or_default<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => config::load_json(p),
        None => Ok(T::default()),
    }
}

/// How the regularization level was requested.
struct LambdaChoice {
    absolute: Option<f64>,
    scale: Option<f64>,
}

impl LambdaChoice {
    /// Resolve against the problem size; `default_scale` applies when
    /// nothing was requested.
    fn resolve(&self, p: usize, n: usize, default_scale: Option<f64>) -> Option<f64> {
        self.absolute
            .or_else(|| self.scale.map(|c| default_lambda(p, n, c)))
            .or_else(|| default_scale.map(|c| default_lambda(p, n, c)))
    }
}

fn cmd_generate(out: &Path, model_cfg: &ModelConfig) -> Result<()> {
    let model = model_cfg.build()?;
    io::write_matrix_csv(&out.join("b_star.csv"), &model.b_star)?;
    io::write_matrix_csv(&out.join("sigma_x.csv"), &model.sigma_x)?;
    io::write_edge_list(&out.join("support.edges"), &model.b_star, &model.edges)?;
    println!(
        "model: p = {}, edges = {}, max degree = {}; wrote b_star.csv, sigma_x.csv, support.edges to {}",
        model.p,
        model.edges.len() / 2,
        model.degree_d,
        out.display()
    );
    Ok(())
}

fn cmd_sample(
    out: &Path,
    model_cfg: &ModelConfig,
    n: usize,
    noise: NoiseKind,
    seed: u64,
) -> Result<()> {
    let model = model_cfg.build()?;
    let samples = draw_samples(&model, &SamplingSpec { n, noise, seed })?;
    io::write_samples_csv(&out.join("samples.csv"), samples.n, samples.p, &samples.y)?;
    io::write_matrix_csv(&out.join("s_cov.csv"), &samples.s_cov)?;
    println!(
        "samples: n = {}, p = {}, seed = {}; wrote samples.csv, s_cov.csv to {}",
        samples.n,
        samples.p,
        seed,
        out.display()
    );
    Ok(())
}

enum EstimateInput {
    File { samples: PathBuf, sigma_x: Option<PathBuf> },
    Draw { model: ModelConfig, n: usize, noise: NoiseKind, seed: u64 },
}

#[derive(Serialize)]
struct EstimateSummary {
    p: usize,
    n: usize,
    lambda: f64,
    iterations: usize,
    converged: bool,
    kkt_residual: f64,
    objective: f64,
    support_size: usize,
    support_eps: f64,
}

fn cmd_estimate(
    out: &Path,
    input: EstimateInput,
    choice: LambdaChoice,
    support_eps: f64,
    overrides: &config::SolverOverrides,
) -> Result<()> {
    let (s_cov, d2, n) = match input {
        EstimateInput::File { samples, sigma_x } => {
            let (n, p, y) = io::read_samples_csv(&samples)?;
            let s_cov = sample_covariance(n, p, &y);
            let d2 = match sigma_x {
                Some(path) => io::read_matrix_csv(&path)?.sym_inv()?,
                None => SymMatrix::identity(p),
            };
            (s_cov, d2, n)
        }
        EstimateInput::Draw { model, n, noise, seed } => {
            let model = model.build()?;
            let samples = draw_samples(&model, &SamplingSpec { n, noise, seed })?;
            (samples.s_cov, model.d2.clone(), n)
        }
    };
    let p = s_cov.dim();
    let lambda = choice
        .resolve(p, n, Some(0.5))
        .expect("a default scale is always supplied");
    let solver_config = overrides.apply(SolverConfig::with_lambda(lambda));
    let fit = fit_balance(&s_cov, &d2, &solver_config)?;

    let support = IndexSet::offdiag_support(&fit.estimate, support_eps);
    io::write_matrix_csv(&out.join("b_hat.csv"), &fit.estimate)?;
    io::write_edge_list(&out.join("support_hat.edges"), &fit.estimate, &support)?;
    let summary = EstimateSummary {
        p,
        n,
        lambda,
        iterations: fit.iterations,
        converged: fit.converged,
        kkt_residual: fit.kkt_residual,
        objective: *fit.objective_trace.last().expect("trace holds the initial value"),
        support_size: support.len() / 2,
        support_eps,
    };
    io::write_json(&out.join("estimate.json"), &summary)?;
    println!(
        "estimate: p = {p}, n = {n}, lambda = {lambda:.6e}, {} edges, {} iterations; \
wrote b_hat.csv, support_hat.edges, estimate.json to {}",
        summary.support_size,
        fit.iterations,
        out.display()
    );
    if !fit.converged {
        return Err(CliError::NotConverged { kkt: fit.kkt_residual });
    }
    Ok(())
}

struct EmpiricalRequest {
    n: usize,
    noise: NoiseKind,
    seed: u64,
    lambda: LambdaChoice,
}

#[derive(Serialize)]
struct DiagnoseDoc {
    p: usize,
    max_degree: usize,
    theory: DiagnosticsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<EmpiricalDoc>,
}

#[derive(Serialize)]
struct EmpiricalDoc {
    n: usize,
    seed: u64,
    lambda: f64,
    /// Sup-norm deviation of the sample covariance from the model
    /// covariance.
    covariance_deviation: f64,
    lemma4: Lemma4Report,
    /// Largest |dual witness entry| off the augmented support.
    pdw_max_dual_ec: f64,
    /// Strict dual feasibility: the witness stays strictly inside the unit
    /// box off the support.
    pdw_strict: bool,
    pdw_restricted_converged: bool,
}

fn cmd_diagnose(
    out: &Path,
    model_cfg: &ModelConfig,
    sigma: f64,
    tau: f64,
    empirical: Option<EmpiricalRequest>,
) -> Result<()> {
    let model = model_cfg.build()?;
    let mut theory = theorem1_constants(&model, sigma, tau)?;

    let empirical_doc = match empirical {
        None => None,
        Some(req) => {
            let samples =
                draw_samples(&model, &SamplingSpec { n: req.n, noise: req.noise, seed: req.seed })?;
            let w_sup = noise_deviation(&model, &samples);
            let lambda = req
                .lambda
                .resolve(model.p, req.n, None)
                .unwrap_or_else(|| theory.theorem_lambda(model.p, req.n));
            let lemma4 = lemma4_radius(&model, w_sup, lambda)?;
            theory.lemma4_radius = Some(lemma4.radius);
            let pdw = pdw_dual_check(&model, &samples, lambda)?;
            Some(EmpiricalDoc {
                n: req.n,
                seed: req.seed,
                lambda,
                covariance_deviation: w_sup,
                lemma4,
                pdw_max_dual_ec: pdw.max_dual_ec,
                pdw_strict: pdw.strict,
                pdw_restricted_converged: pdw.restricted.converged,
            })
        }
    };

    let doc = DiagnoseDoc {
        p: model.p,
        max_degree: model.degree_d,
        theory,
        empirical: empirical_doc,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Parse(format!("could not serialize diagnostics: {e}")))?;
    println!("{text}");
    io::write_json(&out.join("diagnostics.json"), &doc)?;
    Ok(())
}

fn cmd_experiment(out: &Path, spec: &ExperimentSpec, threads: usize) -> Result<()> {
    let result = harness::run_experiment(spec, threads)?;
    harness::write_results_csv(&out.join("results.csv"), &result.rows)?;
    harness::write_aggregates_json(&out.join("aggregates.json"), &result)?;
    println!(
        "experiment: {} trials x {} sizes x {} estimators = {} rows; wrote results.csv, aggregates.json to {}",
        spec.trials,
        spec.n_grid.len(),
        spec.estimators.len(),
        result.rows.len(),
        out.display()
    );
    for agg in &result.aggregates {
        let support = match (agg.mean_precision, agg.mean_recall) {
            (Some(p), Some(r)) => format!(" precision={p:.2} recall={r:.2}"),
            _ => String::new(),
        };
        println!(
            "  {} n={}: success={:.2}{} converged={}/{}",
            agg.estimator, agg.n, agg.success_prob, support, agg.converged_trials, agg.trials
        );
    }
    Ok(())
}
