//! Command-line front end: model files, commands and deterministic output.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod model;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Floquet(a) => commands::floquet(a),
        Command::Export(a) => commands::export(a),
    }
}
