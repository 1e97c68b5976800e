//! Scenario runner for the filtration-expansion lab.

pub mod checks;
pub mod config;
pub mod runner;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use checks::{CheckOutcome, REGISTRY};
pub use config::{parse_scenario, ConfigError, Scenario};
pub use runner::{run_checks, run_scenario, RunError, RunResult};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FILTEX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "filtex", version, about = "Semimartingale decompositions under progressive expansion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario: exit 0 if every check passes, 1 if one fails, 2 on errors.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List available checks.
    ListChecks,
    /// Write sampled paths and moments for plotting.
    EmitPlotData {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Alphabetized check listing, one per line.
pub fn list_checks() -> String {
    let width = REGISTRY.iter().map(|c| c.name.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|c| format!("{:<width$}  {}\n", c.name, c.summary))
        .collect()
}

/// Executes a parsed command and returns the process exit status.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::ListChecks => {
            print!("{}", list_checks());
            0
        }
        Command::Run { config, out } => {
            let result = runner::load_scenario(&config).and_then(|sc| {
                let dir = runner::output_dir(&sc, out.as_deref());
                run_scenario(&sc, &dir)
            });
            match result {
                Ok(r) => {
                    print!("{}", r.summary);
                    if r.passed() {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Command::EmitPlotData { config, out } => {
            let result = runner::load_scenario(&config).and_then(|sc| {
                let dir = runner::output_dir(&sc, out.as_deref());
                runner::emit_plot_data(&sc, &dir).map(|()| dir)
            });
            match result {
                Ok(dir) => {
                    println!("wrote plot data to {}", dir.display());
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    }
}

/// Parses `FILTEX_THREADS`; `None` when unset.
pub fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}
