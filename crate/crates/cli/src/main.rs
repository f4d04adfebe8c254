//! Command-line front end.
//!
//! `ehcr <command> --config <path> [--out <dir>] [--seed N] [--slots N]`
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible scenario,
//! 4 validation failure. `EHCR_WORKERS` sets the sweep worker count.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{execute, CliError, Command};
use config::{parse_config, ConfigError, Overrides};

const WORKERS_ENV: &str = "EHCR_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ehcr",
    version,
    about = "Stable throughput of an energy-harvesting cognitive radio"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated slots per run (overrides `sim.slots`).
    #[arg(long)]
    slots: Option<u64>,
}

fn plain_config_error(key: Option<&str>, message: String) -> CliError {
    CliError::Config(ConfigError {
        key: key.map(str::to_string),
        line: None,
        column: None,
        message,
    })
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        plain_config_error(
            Some(WORKERS_ENV),
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| plain_config_error(Some(WORKERS_ENV), e.to_string()))
}

fn run(args: &Args) -> Result<(), CliError> {
    init_workers()?;
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        plain_config_error(None, format!("cannot read {}: {e}", args.config.display()))
    })?;
    let mut scenario = parse_config(&text)?;
    scenario.apply(&Overrides {
        out: args.out.clone(),
        seed: args.seed,
        slots: args.slots,
    })?;
    let report = execute(args.command, &scenario)?;
    for path in &report.written {
        eprintln!("{}", serde_json::json!({ "wrote": path }));
    }
    println!("{}", report.summary);
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
