//! Library side of the `memheat` command-line tool: configuration
//! parsing, the profile cache, report writing and subcommand execution.

pub mod cache;
pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use run::{run, run_config, Command, RunOptions, RunOutcome};
