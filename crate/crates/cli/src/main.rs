//! `chaoslab`: shadowing, chain recurrence and Bohr-chaos certificates from the
//! command line.
//!
//! Exit codes: 0 success, 2 negative mathematical outcome (hypothesis not met,
//! witness not found, certificate rejected), 1 usage or internal error.

mod commands;
mod output;
mod parse;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, Outcome};

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CHAOSLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("CHAOSLAB_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("CHAOSLAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match commands::run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative(msg)) => {
            eprintln!("negative result: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            let negative = e
                .downcast_ref::<chaoslab_core::Error>()
                .is_some_and(|ce| ce.is_negative_result());
            if negative {
                eprintln!("negative result: {e:#}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
