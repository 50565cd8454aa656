//! `terragen`: generate, export, render and exercise terrains from the shell.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O or network failure.

mod commands;

use std::process::ExitCode;

use clap::Parser;
use terragen_core::{Error, ErrorClass};

use commands::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Validation => 1,
        ErrorClass::Io => 2,
    }
}

fn report(e: &Error) {
    eprintln!("error: {e}");
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        eprintln!("  caused by: {s}");
        src = s.source();
    }
    let mut inner = e;
    while let Error::Step { source, .. } = inner {
        inner = source;
    }
    if let Error::Spec(spec) = inner {
        eprintln!("{}", spec.to_json());
    }
}
