use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use memheat_cli::{run_config, Command, RunOptions};

/// Kernels, mild solutions and decay-rate verification for the fully
/// nonlocal heat equation.
#[derive(Debug, Parser)]
#[command(name = "memheat", version)]
struct Args {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// Profile cache directory, overriding the config.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let options = RunOptions { out: args.out, jobs: args.jobs, cache: args.cache };
    match run_config(args.command, &args.config, &options) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("memheat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
