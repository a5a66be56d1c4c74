use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use knotfield_cli::commands::{cmd_fields, cmd_observables, cmd_trace};
use knotfield_cli::error::CliError;
use knotfield_cli::verify::{cmd_verify, Suite};
use knotfield_cli::{configure_threads, load_config};

/// Knotted electromagnetic fields: sampling, observables, verification and field-line tracing.
#[derive(Parser)]
#[command(name = "knotfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `section.key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config entry; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample E, B, energy density and Poynting vector on the grid.
    Fields(Common),
    /// Write the observables report and spectral dumps.
    Observables(Common),
    /// Run a verification suite; exit status 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Trace field lines from a seeds file and report windings and linking.
    Trace {
        #[command(flatten)]
        common: Common,
        /// CSV of X,Y,Z seeds; overrides `trace.seeds`.
        #[arg(long)]
        seeds: Option<PathBuf>,
    },
    /// Print the effective config in normalized form.
    Config(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads(std::env::var("KNOTFIELD_THREADS").ok().as_deref())?;
    let common = match &cli.command {
        Command::Fields(c) | Command::Observables(c) | Command::Config(c) => c,
        Command::Verify { common, .. } | Command::Trace { common, .. } => common,
    };
    let cfg = load_config(common.config.as_deref(), &common.set)?;
    match &cli.command {
        Command::Fields(_) => cmd_fields(&cfg),
        Command::Observables(_) => cmd_observables(&cfg),
        Command::Verify { suite, .. } => cmd_verify(&cfg, *suite),
        Command::Trace { seeds, .. } => cmd_trace(&cfg, seeds.as_deref()),
        Command::Config(_) => {
            print!("{}", cfg.serialize());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("knotfield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
