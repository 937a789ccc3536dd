//! `carnot-lab`: command-line experiments on Carnot groups.
//!
//! Exit status is 0 whenever a report is written, whatever its verdicts;
//! 2 flags a bad configuration, 3 an evaluation failure, 4 an I/O failure.

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carnot-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
