//! Batch pipeline over case directories: phantom generation, preprocessing,
//! training-pair construction, evaluation and reporting.

pub mod args;
pub mod commands;
pub mod error;
pub mod layout;

use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_INTERNAL};

/// Parses `argv` and runs the command, writing its report to `stdout`.
pub fn run_from<I, T>(argv: I, stdout: &mut impl Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, stdout)
}

pub fn run(cli: &Cli, stdout: &mut impl Write) -> CliResult<()> {
    let ctx = commands::Context::new(&cli.global)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = pool.install(|| commands::dispatch(&ctx, &cli.command))?;
    stdout
        .write_all(report.as_bytes())
        .map_err(|e| CliError::Output {
            path: "<stdout>".into(),
            reason: e.to_string(),
        })
}
