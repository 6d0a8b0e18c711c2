//! `latent-mos` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for
//! unreadable or invalid input data, 3 for numerical failures.

mod aggregate;
mod cli;
mod error;
mod evaluate;
mod manifest;
mod simulate;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::CliResult;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Aggregate(args) => aggregate::run(args),
        Command::Evaluate(args) => evaluate::run(args).map(drop),
        Command::Simulate(args) => simulate::run(args),
    }
}
