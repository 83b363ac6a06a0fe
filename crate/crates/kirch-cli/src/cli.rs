//! Flag surface, and the merge of flags over config files.
//!
//! Every command accepts `--config FILE`; flags override individual fields
//! of the loaded config. Model flags that pick a graph family (`--chain`,
//! `--rows/--cols`, `--edge-list`) replace the config's graph outright,
//! while `--weight`/`--margin` alone retune the graph the config chose.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kirch_core::graph::GraphSpec;
use kirch_core::sample::NoiseKind;

use crate::config::{CovarianceSpec, ModelConfig};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Parser, Debug)]
#[command(
    name = "kirch",
    version,
    about = "Learn which lines of a conservation network carry flow, from nodal measurements"
)]
pub struct Cli {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory output files go to (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Seed override: sampling seed, or the experiment base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for experiments; 0 means all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a ground-truth model: balance matrix, injection covariance,
    /// edge list.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Draw potential samples from a model.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of samples.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Fit the sparse balance-matrix estimate from samples (drawn or read
    /// from a file).
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        /// Potentials CSV (one row per sample) to fit instead of drawing.
        #[arg(long, value_name = "FILE")]
        samples: Option<PathBuf>,
        /// Injection covariance CSV for `--samples` (identity if absent).
        #[arg(long, value_name = "FILE")]
        sigma_x: Option<PathBuf>,
        /// Number of samples to draw (when fitting a generated model).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Absolute regularization level (wins over --lambda-c).
        #[arg(long)]
        lambda: Option<f64>,
        /// Scale c in lambda = c sqrt(ln p / n); default 0.5.
        #[arg(long)]
        lambda_c: Option<f64>,
        /// |entry| threshold for the reported support.
        #[arg(long)]
        support_eps: Option<f64>,
    },
    /// Evaluate the recovery-theory quantities for a model; with --n, also
    /// the empirical dual-feasibility and radius checks on a fresh draw.
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
        /// Sub-Gaussian proxy scale of the rescaled potentials.
        #[arg(long)]
        sigma: Option<f64>,
        /// Probability exponent (> 2).
        #[arg(long)]
        tau: Option<f64>,
        /// Draw this many samples for the empirical checks.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Regularization level for the empirical checks.
        #[arg(long)]
        lambda: Option<f64>,
        /// Scale c in lambda = c sqrt(ln p / n) for the empirical checks.
        #[arg(long)]
        lambda_c: Option<f64>,
    },
    /// Run a Monte-Carlo sweep described by --config.
    Experiment,
}

/// Graph-family selection flags, shared by the model-driven commands.
#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// Chain (path) graph with this many nodes.
    #[arg(long, value_name = "P", conflicts_with_all = ["rows", "cols", "edge_list"])]
    pub chain: Option<usize>,

    /// Grid rows (use with --cols).
    #[arg(long, requires = "cols", conflicts_with = "edge_list")]
    pub rows: Option<usize>,

    /// Grid columns (use with --rows).
    #[arg(long, requires = "rows")]
    pub cols: Option<usize>,

    /// Edge-list file: `i j [weight]` per line, 0-based, `#` comments.
    #[arg(long, value_name = "FILE")]
    pub edge_list: Option<PathBuf>,

    /// Node count for --edge-list (default: max endpoint + 1).
    #[arg(long, requires = "edge_list")]
    pub p: Option<usize>,

    /// Build the weighted graph Laplacian from --edge-list.
    #[arg(long, requires = "edge_list")]
    pub laplacian: bool,

    /// Delete this node after the Laplacian build (grounds the network).
    #[arg(long, value_name = "NODE", requires = "laplacian")]
    pub reduce: Option<usize>,

    /// Edge weight for chain/grid graphs (negative gives Laplacian signs).
    #[arg(long, allow_hyphen_values = true)]
    pub weight: Option<f64>,

    /// Diagonal dominance margin.
    #[arg(long)]
    pub margin: Option<f64>,
}

impl ModelArgs {
    /// Merge these flags over an optional config-file model.
    pub fn resolve(
        &self,
        config_graph: Option<GraphSpec>,
        config_cov: Option<CovarianceSpec>,
    ) -> Result<ModelConfig> {
        let graph = if let Some(p) = self.chain {
            GraphSpec::Chain {
                p,
                edge_weight: self.weight.unwrap_or(1.0),
                diag_margin: self.margin.unwrap_or(1.0),
            }
        } else if let (Some(rows), Some(cols)) = (self.rows, self.cols) {
            GraphSpec::Grid {
                rows,
                cols,
                edge_weight: self.weight.unwrap_or(1.0),
                diag_margin: self.margin.unwrap_or(1.0),
            }
        } else if let Some(path) = &self.edge_list {
            let edges = io::read_edge_list(path)?;
            let p = match self.p {
                Some(p) => p,
                None => edges
                    .iter()
                    .map(|&(i, j, _)| i.max(j) + 1)
                    .max()
                    .ok_or_else(|| CliError::Parse(format!(
                        "{}: edge list is empty and --p was not given",
                        path.display()
                    )))?,
            };
            GraphSpec::EdgeList {
                p,
                edges,
                laplacian: self.laplacian,
                reduce_node: self.reduce,
                diag_margin: self.margin.unwrap_or(1.0),
            }
        } else if let Some(mut graph) = config_graph {
            // Family comes from the config; retune its shared knobs.
            match &mut graph {
                GraphSpec::Chain { edge_weight, diag_margin, .. }
                | GraphSpec::Grid { edge_weight, diag_margin, .. } => {
                    if let Some(w) = self.weight {
                        *edge_weight = w;
                    }
                    if let Some(m) = self.margin {
                        *diag_margin = m;
                    }
                }
                GraphSpec::EdgeList { diag_margin, .. } => {
                    if let Some(m) = self.margin {
                        *diag_margin = m;
                    }
                }
            }
            graph
        } else {
            return Err(CliError::Usage(String::from(
                "no model given: pass --chain/--rows --cols/--edge-list or a --config with a graph",
            )));
        };
        Ok(ModelConfig { graph, covariance: config_cov.unwrap_or_default() })
    }
}

/// Noise-law flags.
#[derive(Args, Clone, Copy, Debug, Default)]
pub struct NoiseArgs {
    /// Injection noise law.
    #[arg(long, value_enum)]
    pub noise: Option<NoiseFlag>,
    /// Degrees of freedom for --noise student-t (default 9).
    #[arg(long, requires = "noise")]
    pub dof: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseFlag {
    Gaussian,
    StudentT,
}

impl NoiseArgs {
    /// Merge over an optional config-file noise kind.
    pub fn resolve(&self, config_noise: Option<NoiseKind>) -> NoiseKind {
        match self.noise {
            Some(NoiseFlag::Gaussian) => NoiseKind::Gaussian,
            Some(NoiseFlag::StudentT) => NoiseKind::StudentT { dof: self.dof.unwrap_or(9.0) },
            None => config_noise.unwrap_or(NoiseKind::Gaussian),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_replace_the_config_family_but_retune_its_knobs() {
        let config_graph =
            Some(GraphSpec::Chain { p: 16, edge_weight: 1.0, diag_margin: 1.0 });

        // Margin flag alone retunes the config's chain.
        let args = ModelArgs { margin: Some(2.5), ..ModelArgs::default() };
        let merged = args.resolve(config_graph.clone(), None).unwrap();
        assert_eq!(
            merged.graph,
            GraphSpec::Chain { p: 16, edge_weight: 1.0, diag_margin: 2.5 }
        );

        // A family flag replaces the graph outright.
        let args = ModelArgs { chain: Some(4), ..ModelArgs::default() };
        let merged = args.resolve(config_graph, None).unwrap();
        assert_eq!(
            merged.graph,
            GraphSpec::Chain { p: 4, edge_weight: 1.0, diag_margin: 1.0 }
        );

        // Nothing anywhere is a usage error.
        let err = ModelArgs::default().resolve(None, None);
        assert!(matches!(err, Err(CliError::Usage(_))));
    }

    #[test]
    fn noise_flags_merge_over_config() {
        let flags = NoiseArgs { noise: Some(NoiseFlag::StudentT), dof: None };
        assert_eq!(flags.resolve(None), NoiseKind::StudentT { dof: 9.0 });
        let none = NoiseArgs::default();
        assert_eq!(
            none.resolve(Some(NoiseKind::StudentT { dof: 5.0 })),
            NoiseKind::StudentT { dof: 5.0 }
        );
        assert_eq!(none.resolve(None), NoiseKind::Gaussian);
    }

    #[test]
    fn cli_parses_a_representative_line() {
        use clap::Parser as _;
        let cli = Cli::try_parse_from([
            "kirch", "estimate", "--chain", "16", "--n", "2000", "--lambda-c", "0.5",
            "--out", "/tmp/x", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(7));
        match cli.command {
            Command::Estimate { model, n, lambda_c, .. } => {
                assert_eq!(model.chain, Some(16));
                assert_eq!(n, Some(2000));
                assert_eq!(lambda_c, Some(0.5));
            }
            _ => panic!("parsed into the wrong command"),
        }
    }
}
