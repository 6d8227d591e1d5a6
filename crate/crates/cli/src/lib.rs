//! Command-line front end: identity grids, exchange-model spectra and
//! partition tables, written as self-describing JSON or CSV reports.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

pub use args::{Cli, Command};
pub use error::CliError;

/// Runs one parsed invocation and returns its exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Spectrum(a) => commands::cmd_spectrum(a),
        Command::Partitions(a) => commands::cmd_partitions(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
