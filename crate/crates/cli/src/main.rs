mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetero_core::Exec;

use crate::commands::Run;
use crate::config::{parse_config, Verb};
use crate::error::CliError;

/// Overrides the configured output directory.
const OUTPUT_DIR_ENV: &str = "HETERO_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "hetero", version, about = "Heteroclinic standing waves on periodic strips")]
struct Cli {
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory; takes precedence over the environment and config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Constrained standing-wave solve with diagnostics.
    Solve(ConfigArg),
    /// 1D heteroclinic connection.
    Ode(ConfigArg),
    /// Comparison function on a period slab and the sequence t_j.
    Phi(ConfigArg),
    /// Exponential decay fit of a solution.
    DecayFit {
        #[command(flatten)]
        config: ConfigArg,
        /// Solution CSV to fit; solves first when absent.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Randomized cut-off and maximum-principle trials.
    CutoffTest(ConfigArg),
    /// Hypothesis checks on the potential.
    Check(ConfigArg),
}

impl Command {
    fn verb(&self) -> Verb {
        match self {
            Command::Solve(_) => Verb::Solve,
            Command::Ode(_) => Verb::Ode,
            Command::Phi(_) => Verb::Phi,
            Command::DecayFit { .. } => Verb::DecayFit,
            Command::CutoffTest(_) => Verb::CutoffTest,
            Command::Check(_) => Verb::Check,
        }
    }

    fn config_path(&self) -> &PathBuf {
        match self {
            Command::Solve(c) | Command::Ode(c) | Command::Phi(c) | Command::CutoffTest(c) | Command::Check(c) => {
                &c.config
            }
            Command::DecayFit { config, .. } => &config.config,
        }
    }
}

fn executor(threads: usize) -> Result<Exec, CliError> {
    match threads {
        0 => Err(CliError::Config("at `--threads`: must be at least 1".into())),
        1 => Ok(Exec::Sequential),
        n => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("at `--threads`: {e}")))?;
            Ok(Exec::Parallel)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let verb = cli.command.verb();
    let path = cli.command.config_path();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("at `--config` ({}): {e}", path.display())))?;
    let mut parsed = parse_config(&text, verb)?;
    if let Some(dir) = cli.out.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)) {
        parsed.config.output_dir = dir;
    }
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let run = Run {
        config: &parsed.config,
        warnings: &parsed.warnings,
        exec: executor(cli.threads)?,
    };
    match &cli.command {
        Command::Solve(_) => commands::solve(&run),
        Command::Ode(_) => commands::ode(&run),
        Command::Phi(_) => commands::phi(&run),
        Command::DecayFit { field, .. } => commands::decay(&run, field.as_deref()),
        Command::CutoffTest(_) => commands::cutoff(&run),
        Command::Check(_) => commands::check(&run),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
