//! Command-line front end: configuration, dispatch and report persistence.

pub mod args;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

use args::Cli;
use commands::{dispatch, Status};
use config::{parse_config, RunConfig};
use error::CliError;
use output::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(Status::Success) => EXIT_OK,
        Ok(Status::CheckFailed) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cli: &Cli) -> Result<Status, CliError> {
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => RunConfig::default(),
    };
    let cfg = cli.resolve(file)?;
    let outcome = dispatch(cli.command(), &cfg)?;
    let mut text = serde_json::to_string_pretty(&outcome.report)?;
    text.push('\n');
    if let (Some(path), Some(csv)) = (cli.csv_path(), &outcome.csv) {
        write_atomic(path, csv.as_bytes())?;
    }
    match &cfg.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            println!("{}", outcome.summary);
        }
        None => {
            print!("{text}");
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(outcome.status)
}
