mod args;
mod commands;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{dispatch, RunContext, UsageError};

/// Exit codes: 0 success, 1 usage error, 2 I/O or data error.
fn run(argv: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build_global()
    {
        eprintln!("error: {e}");
        return 2;
    }
    let ctx = RunContext {
        seed: cli.seed,
        verbose: cli.verbose,
    };
    match dispatch(&cli.command, &ctx) {
        Ok(()) => 0,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
