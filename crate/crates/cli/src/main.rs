use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use induction_cli::commands::{self, Options};
use induction_cli::{CliError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "induction", version, about = "SBP-SAT solver for the 2D magnetic induction equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Step one configuration, writing fields and per-step diagnostics.
    Run { config: PathBuf },
    /// Error table against the exact rotation solution.
    Converge { config: PathBuf },
    /// Per-step growth factors for a list of step sizes.
    Stability { config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let opts = Options {
        output_dir: cli.output_dir,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Run { config } => commands::run(&RunConfig::load(&config)?, &opts),
        Command::Converge { config } => commands::converge(&RunConfig::load(&config)?, &opts),
        Command::Stability { config } => commands::stability(&RunConfig::load(&config)?, &opts),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("induction: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
