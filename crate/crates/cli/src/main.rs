use std::process::ExitCode;

use clap::Parser;
use gentile_cli::error::EXIT_CONFIG;
use gentile_cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the configuration exit code; help and
            // version requests succeed
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    ExitCode::from(gentile_cli::run(cli))
}
