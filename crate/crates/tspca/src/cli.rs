use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::config::{AnalyzeOptions, ExperimentOptions, SimulateOptions};
use crate::error::{CliError, CliResult};
use crate::io::{read_json, write_json};
use crate::{analyze, experiment, fixtures, simulate};

#[derive(Debug, Parser)]
#[command(name = "tspca", version, about = "PCA with standard errors for multivariate time series")]
pub struct Cli {
    /// JSON file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for replicate loops.
    #[arg(long, global = true, env = "TSPCA_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigen-decomposition, standard errors and loading tests for a CSV series.
    Analyze(AnalyzeOptions),
    /// Simulate one of the eight built-in models.
    Simulate(SimulateOptions),
    /// Compare standard-error methods against Monte Carlo on the built-in models.
    Experiment(ExperimentOptions),
    /// Print the built-in model definitions as JSON.
    Fixtures {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn file_options<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> CliResult<T> {
    match path {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    init_threads(cli.threads)?;
    let config = cli.config.as_ref();
    match cli.command {
        Command::Analyze(opts) => {
            let cfg = opts.merge(file_options(config)?).resolve()?;
            let a = analyze::run(&cfg)?;
            print!("{}", analyze::summary(&a, &cfg));
        }
        Command::Simulate(opts) => {
            let cfg = opts.merge(file_options(config)?).resolve()?;
            let s = simulate::run(&cfg)?;
            println!("wrote {} x {} series to {}", s.len(), s.dim(), cfg.out.join("series.csv").display());
        }
        Command::Experiment(opts) => {
            let cfg = opts.merge(file_options(config)?).resolve()?;
            let outcome = experiment::run(&cfg, |line| println!("{line}"))?;
            if let Some((_, first)) = outcome.failures.into_iter().next() {
                return Err(CliError::Aggregate {
                    failed: cfg.dgp.len() - outcome.comparisons.len(),
                    total: cfg.dgp.len(),
                    first: Box::new(first),
                });
            }
        }
        Command::Fixtures { out } => {
            let v = fixtures::dump()?;
            match out {
                Some(path) => write_json(&path, &v)?,
                None => println!("{}", serde_json::to_string_pretty(&v).expect("serializable")),
            }
        }
    }
    Ok(())
}
