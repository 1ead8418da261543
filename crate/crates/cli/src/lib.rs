//! Command implementations for the `lodcdf` binary. Each command returns its
//! complete output so that nothing is written when it fails.

pub mod args;
pub mod commands;
pub mod error;

pub use args::Cli;
pub use error::CliError;

use args::Command;

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Estimate(a) => commands::cmd_estimate(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
    }
}
