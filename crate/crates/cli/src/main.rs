//! `dsbm`: fit, check and compare directed block models from the command line.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsbm_core::{ModelKind, VarianceMethod};

use config::Format;

/// Invalid invocation, reported with exit code 1.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(
    name = "dsbm",
    version,
    about = "Directed stochastic block models: fitting, predictive checks and LLR model selection"
)]
struct Cli {
    /// Worker threads for replicate loops (default: all cores). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GraphArgs {
    /// Edge list CSV with header `source,target[,count]`.
    #[arg(long)]
    pub edges: PathBuf,
    /// Group assignment CSV with header `node,group`.
    #[arg(long)]
    pub groups: PathBuf,
}

#[derive(Args, Clone)]
pub struct OutArgs {
    /// Output directory; without it the main artifact goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit a model and write its parameters with a fit summary.
    Fit {
        #[command(flatten)]
        graph: GraphArgs,
        /// dcsbm, mixed-group or mixed-node.
        #[arg(long)]
        model: ModelKind,
        /// Iteration cap for the mixed-node solver.
        #[arg(long, default_value_t = 20_000)]
        max_iterations: usize,
        /// Convergence tolerance for the mixed-node solver.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draw networks from a fitted model as edge list CSVs.
    Sample {
        /// Model artifact written by `fit`.
        #[arg(long, conflicts_with_all = ["edges", "groups", "model"])]
        model_file: Option<PathBuf>,
        #[arg(long, requires_all = ["groups", "model"])]
        edges: Option<PathBuf>,
        #[arg(long, requires = "edges")]
        groups: Option<PathBuf>,
        #[arg(long, requires = "edges")]
        model: Option<ModelKind>,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (required).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Observed assortativity along paths of the given lengths.
    Assort {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        k: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Predictive check of path assortativity under a fitted model.
    Ppc {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        model: ModelKind,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Likelihood-ratio test of the mixed model against the DCSBM.
    Llr {
        #[command(flatten)]
        graph: GraphArgs,
        /// exact_numeric, taylor, monte_carlo or bootstrap.
        #[arg(long, default_value = "monte_carlo")]
        variance: VarianceMethod,
        /// Draws for Monte Carlo or bootstrap variance estimates.
        #[arg(long, default_value_t = 2000)]
        replicates: usize,
        /// Also run a parametric bootstrap with this many draws.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Parametric bootstrap of the likelihood-ratio statistic.
    Bootstrap {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Null distribution of the LLR statistic across network densities.
    Sweep {
        #[arg(long, default_value_t = 1000)]
        n_nodes: usize,
        #[arg(long, default_value_t = 2)]
        n_groups: usize,
        /// Expected total edge counts (default: a grid from sparse to dense).
        #[arg(long, value_delimiter = ',')]
        densities: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the 30,000-node grid. Slow.
        #[arg(long)]
        full_scale: bool,
        /// Permit more than 5,000 nodes.
        #[arg(long)]
        allow_large: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Exit status for an error: 1 usage, 2 data, 3 numerical failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match err.downcast_ref::<dsbm_core::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(dsbm_core::Error::InvalidArgument(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
