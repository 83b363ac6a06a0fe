//! JSON config schemas for the commands and the experiment harness.
//!
//! The config file is the source of truth; command-line flags override
//! individual leaves. Unknown keys are rejected everywhere so typos fail
//! loudly instead of silently running defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use kirch_core::graph::{GraphSpec, NetworkModel};
use kirch_core::sample::NoiseKind;
use kirch_core::sym::SymMatrix;
use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

/// Injection covariance mode for a model config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CovarianceSpec {
    /// `Sigma_X = I`.
    Identity,
    /// `Sigma_X = diag(u_1..u_p)` with `u_i` i.i.d. uniform on `[lo, hi]`,
    /// drawn from the given seed (independent of the sampling seed).
    DiagonalUniform { lo: f64, hi: f64, seed: u64 },
}

impl Default for CovarianceSpec {
    fn default() -> CovarianceSpec {
        CovarianceSpec::Identity
    }
}

/// Ground-truth model: graph plus injection covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub covariance: CovarianceSpec,
}

impl ModelConfig {
    /// Identity-covariance model over a graph.
    pub fn from_graph(graph: GraphSpec) -> ModelConfig {
        ModelConfig { graph, covariance: CovarianceSpec::Identity }
    }

    /// Construct the network model this config describes.
    pub fn build(&self) -> Result<NetworkModel> {
        let model = NetworkModel::from_spec(&self.graph)?;
        match &self.covariance {
            CovarianceSpec::Identity => Ok(model),
            CovarianceSpec::DiagonalUniform { lo, hi, seed } => {
                if !(*lo > 0.0 && hi >= lo) {
                    return Err(CliError::Config {
                        path: PathBuf::from("<covariance>"),
                        message: format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
                    });
                }
                let mut rng = ChaCha12Rng::seed_from_u64(*seed);
                let d: Vec<f64> =
                    (0..model.p).map(|_| rng.random_range(*lo..=*hi)).collect();
                Ok(model.with_injection_covariance(SymMatrix::from_diag(&d))?)
            }
        }
    }
}

/// The estimators the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// l1-regularized balance-matrix MLE.
    #[serde(rename = "L1MLE")]
    L1Mle,
    /// Graphical lasso + square-root threshold rule.
    #[serde(rename = "GLASSO_SR")]
    GlassoSr,
    /// Graphical lasso + negative-entry (two-hop) rule.
    #[serde(rename = "GLASSO_2HR")]
    Glasso2hr,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::L1Mle => "L1MLE",
            EstimatorKind::GlassoSr => "GLASSO_SR",
            EstimatorKind::Glasso2hr => "GLASSO_2HR",
        })
    }
}

/// How the regularization scale `c` (in `lambda = c sqrt(ln p / n)`) is
/// chosen for one estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaRule {
    /// Fixed scale.
    Constant(f64),
    /// Pick the best scale from candidates by a reduced pilot sweep.
    Pilot(Vec<f64>),
}

/// Full description of one experiment sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub model: ModelConfig,
    /// Ascending sample sizes.
    pub n_grid: Vec<usize>,
    /// Monte-Carlo repetitions per grid point.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Which estimators to run.
    pub estimators: Vec<EstimatorKind>,
    /// Per-estimator lambda rule; estimators not listed use
    /// `constant 0.5`.
    #[serde(default)]
    pub lambda_constants: BTreeMap<EstimatorKind, LambdaRule>,
    /// Injection noise distribution.
    #[serde(default = "default_noise")]
    pub noise: NoiseKind,
    /// Base RNG seed; per-trial seeds derive from it deterministically.
    pub base_seed: u64,
    /// |entry| threshold for reading the MLE support off the estimate.
    #[serde(default = "default_support_eps")]
    pub support_eps: f64,
    /// Threshold for the baseline square-root and two-hop rules.
    #[serde(default = "default_sr_threshold")]
    pub sr_threshold: f64,
    /// Record wall-clock per trial. Off by default so reruns are
    /// bit-identical (the column is 0 when off).
    #[serde(default)]
    pub record_wall_time: bool,
    /// Solver knobs applied to every fit in the sweep (ill-conditioned
    /// fixtures need a larger iteration budget than the defaults).
    #[serde(default)]
    pub solver: SolverOverrides,
}

fn default_trials() -> usize {
    100
}

fn default_noise() -> NoiseKind {
    NoiseKind::Gaussian
}

fn default_support_eps() -> f64 {
    1e-8
}

fn default_sr_threshold() -> f64 {
    1e-2
}

impl ExperimentSpec {
    /// Schema-level validation beyond serde.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid must be nonempty"));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("n_grid must be strictly ascending"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(invalid("select at least one estimator"));
        }
        if !(self.support_eps >= 0.0) || !(self.sr_threshold > 0.0) {
            return Err(invalid("support_eps must be >= 0 and sr_threshold > 0"));
        }
        for rule in self.lambda_constants.values() {
            match rule {
                LambdaRule::Constant(c) if !(*c >= 0.0) => {
                    return Err(invalid("lambda constant must be nonnegative"));
                }
                LambdaRule::Pilot(cands) if cands.is_empty() => {
                    return Err(invalid("pilot candidate list must be nonempty"));
                }
                _ => {}
            }
        }
        self.solver.validate()?;
        Ok(())
    }

    /// The lambda rule for an estimator (default `constant 0.5`).
    pub fn lambda_rule(&self, estimator: EstimatorKind) -> LambdaRule {
        self.lambda_constants
            .get(&estimator)
            .cloned()
            .unwrap_or(LambdaRule::Constant(0.5))
    }
}

fn invalid(message: &str) -> CliError {
    CliError::Config { path: PathBuf::from("<experiment>"), message: message.into() }
}

/// Solver knobs a config may override (all optional; missing = default).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_iters: Option<usize>,
    pub rel_obj_tol: Option<f64>,
    pub kkt_tol: Option<f64>,
    pub init_step: Option<f64>,
    pub backtrack: Option<f64>,
    pub accelerate: Option<bool>,
}

impl SolverOverrides {
    /// Reject values the solver cannot work with.
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == Some(0) {
            return Err(invalid("solver.max_iters must be at least 1"));
        }
        if let Some(v) = self.rel_obj_tol {
            if !(v >= 0.0) {
                return Err(invalid("solver.rel_obj_tol must be nonnegative"));
            }
        }
        if let Some(v) = self.kkt_tol {
            if !(v > 0.0) {
                return Err(invalid("solver.kkt_tol must be positive"));
            }
        }
        if let Some(v) = self.init_step {
            if !(v > 0.0) {
                return Err(invalid("solver.init_step must be positive"));
            }
        }
        if let Some(v) = self.backtrack {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid("solver.backtrack must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Fold the overrides into a solver config.
    pub fn apply(&self, mut config: kirch_core::solver::SolverConfig) -> kirch_core::solver::SolverConfig {
        if let Some(v) = self.max_iters {
            config.max_iters = v;
        }
        if let Some(v) = self.rel_obj_tol {
            config.rel_obj_tol = v;
        }
        if let Some(v) = self.kkt_tol {
            config.kkt_tol = v;
        }
        if let Some(v) = self.init_step {
            config.init_step = v;
        }
        if let Some(v) = self.backtrack {
            config.backtrack = v;
        }
        if let Some(v) = self.accelerate {
            config.accelerate = v;
        }
        config
    }
}

/// Config schema for `kirch generate`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub graph: Option<GraphSpec>,
    pub covariance: Option<CovarianceSpec>,
}

/// Config schema for `kirch sample`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub graph: Option<GraphSpec>,
    pub covariance: Option<CovarianceSpec>,
    pub n: Option<usize>,
    pub noise: Option<NoiseKind>,
    pub seed: Option<u64>,
}

/// Config schema for `kirch estimate`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub graph: Option<GraphSpec>,
    pub covariance: Option<CovarianceSpec>,
    /// Read potentials from this CSV instead of drawing from a model.
    pub samples: Option<PathBuf>,
    /// Injection covariance CSV accompanying `samples` (identity if absent).
    pub sigma_x: Option<PathBuf>,
    pub n: Option<usize>,
    pub noise: Option<NoiseKind>,
    pub seed: Option<u64>,
    /// Absolute regularization level; wins over `lambda_c`.
    pub lambda: Option<f64>,
    /// Scale `c` in `lambda = c sqrt(ln p / n)` (default 0.5).
    pub lambda_c: Option<f64>,
    /// |entry| threshold for reporting the estimated support.
    pub support_eps: Option<f64>,
    pub solver: Option<SolverOverrides>,
}

/// Config schema for `kirch diagnose`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub graph: Option<GraphSpec>,
    pub covariance: Option<CovarianceSpec>,
    /// Sub-Gaussian proxy scale of the rescaled potentials.
    pub sigma: Option<f64>,
    /// Probability exponent (must exceed 2).
    pub tau: Option<f64>,
    /// If set, also draw `n` samples and run the empirical checks
    /// (restricted-program radius, strict dual feasibility).
    pub n: Option<usize>,
    pub noise: Option<NoiseKind>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub lambda_c: Option<f64>,
}

/// Load and validate a JSON config of any schema type.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
