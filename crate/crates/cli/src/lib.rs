//! Command line front end and HTTP service for the ingredient recommender.

pub mod args;
pub mod commands;
pub mod error;
pub mod service;

use args::{load_config, Cli, Command};
use error::CliError;

/// Runs one parsed invocation and returns what should go to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let config = config.as_ref();
    match cli.command {
        Command::Prepare(a) => commands::prepare(a, config),
        Command::Stats(a) => commands::stats(a, config),
        Command::Build(a) => commands::build(a, config),
        Command::Evaluate(a) => commands::evaluate(a, config),
        Command::Sweep(a) => commands::sweep_cmd(a, config),
        Command::Recommend(a) => commands::recommend_cmd(a, config),
        Command::Serve(a) => commands::serve(a, config),
    }
}
