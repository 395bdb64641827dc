mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::execute(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
