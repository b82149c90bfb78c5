//! `weylkit`: command-line access to the forward, inverse, evolution and
//! dynamical pipelines.
//!
//! Results go to stdout or `--out` as JSON (or CSV for tables). Every
//! output carries the resolved configuration. Failures print a JSON error
//! on stderr and exit with 1 for invalid input, 2 for numerical failure.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            output::report_error("Usage", &e.to_string());
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            output::report_error(e.code(), &e.to_string());
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
