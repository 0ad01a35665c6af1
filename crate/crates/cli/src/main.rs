//! `twsbr` command-line entry point.

mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_CONFIG } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate::run(&a),
        Command::Rootlocus(a) => commands::rootlocus::run(&a),
        Command::Compare(a) => commands::compare::run(&a),
        Command::Serve(a) => commands::serve::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twsbr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
