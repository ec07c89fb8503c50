//! The `cddr` command-line tool: ingestion, configuration and the
//! diagnose, simulate and validate-clt commands.

pub mod args;
pub mod common;
pub mod config;
pub mod diagnose;
pub mod error;
pub mod ingest;
pub mod setting;
pub mod simulate;
pub mod svg;
pub mod validate_clt;

use std::ffi::OsString;

use clap::Parser;

pub use error::{CliError, Result};

use args::{Cli, Command};

pub fn execute(command: &Command) -> Result<Vec<std::path::PathBuf>> {
    match command {
        Command::Diagnose(a) => diagnose::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::ValidateClt(a) => validate_clt::run(a),
    }
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
