//! Command-line front end for the ddmetrics library.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

/// Failure classes mapped onto exit codes: configuration problems exit 2,
/// numerical or fit failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ddmetrics",
    version,
    about = "Pulse-protected frequency metrology: filter functions, decoherence \
             integrals, precision scans, and Monte-Carlo cross-checks",
    after_help = "Configuration comes from --preset or --config (TOML); any key can \
                  be overridden by the flag of the same name. DDMETRICS_THREADS caps \
                  worker threads."
)]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration by name
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Print the merged effective configuration as TOML and exit
    #[arg(long, global = true)]
    print_config: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the pulse-train filter function F_n(z)
    Filter,
    /// Tabulate the decoherence exponent chi(tau)
    Coherence,
    /// Tabulate signal and frequency uncertainty over tau
    Scan,
    /// Optimize tau per qubit count and fit the N-scaling exponent
    Scaling,
    /// Report probe-state moments, outcome probabilities, and bounds
    State,
    /// Compare Monte-Carlo chi estimates against quadrature
    McValidate,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DDMETRICS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "DDMETRICS_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = config::load(cli.config.as_deref(), cli.preset.as_deref())?;
    cli.overrides.apply(&mut cfg);
    if cli.print_config {
        // An emitted config parses back to the identical configuration, so
        // this output is a complete, rerunnable record of the invocation.
        print!("{}", config::emit(&cfg));
        return Ok(());
    }
    match cli.command {
        Cmd::Filter => commands::run_filter(&cfg),
        Cmd::Coherence => commands::run_coherence(&cfg),
        Cmd::Scan => commands::run_scan(&cfg),
        Cmd::Scaling => commands::run_scaling(&cfg),
        Cmd::State => commands::run_state(&cfg),
        Cmd::McValidate => commands::run_mc_validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
