use std::process::ExitCode;

use clap::Parser;
use lymphkit_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lymphkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
