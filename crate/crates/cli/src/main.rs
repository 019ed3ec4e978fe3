mod bundle;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elicit_core::{Error, ErrorKind, Result};

use crate::commands::{Outcome, SweepRequest};
use crate::config::{Overrides, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

/// Prior elicitation from historical binary decisions.
#[derive(Parser)]
#[command(name = "elicit", version)]
struct Cli {
    /// Worker threads for chains and replicates (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every split replicate (and the full data) and write a model bundle.
    Fit(RunArgs),
    /// Evaluate a bundle's replicates on their test sets.
    Diagnose {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elicit priors for the cases in a CSV file.
    Elicit {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the full model with variants that drop variable groups.
    Ablate(RunArgs),
    /// Sweep one attribute of a case and elicit a prior per value.
    Counterfactual {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        attribute: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long)]
        case_id: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the synthetic benchmark suite.
    Bench(RunArgs),
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        seed: args.seed,
        out: args.out.clone(),
        replicates: args.replicates,
        samples: args.samples,
    });
    Ok(config)
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    match cli.command {
        Command::Fit(args) => commands::fit(&load(&args)?),
        Command::Diagnose {
            bundle,
            samples,
            out,
        } => commands::diagnose(&bundle, samples, out),
        Command::Elicit {
            bundle,
            cases,
            samples,
            out,
        } => commands::elicit(&bundle, &cases, samples, out),
        Command::Ablate(args) => commands::ablate_cmd(&load(&args)?),
        Command::Counterfactual {
            bundle,
            cases,
            attribute,
            values,
            case_id,
            samples,
            out,
        } => commands::counterfactual_cmd(
            &bundle,
            SweepRequest {
                cases,
                attribute,
                values,
                case_id,
                samples,
                out,
            },
        ),
        Command::Bench(args) => commands::bench(&load(&args)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ConvergenceFlagged) => {
            eprintln!(
                "warning: convergence diagnostics flagged; see convergence.json in the output"
            );
            ExitCode::from(EXIT_CONVERGENCE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Internal => EXIT_INTERNAL,
            })
        }
    }
}
