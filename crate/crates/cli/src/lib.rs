//! Library side of the `nodal` command.
//!
//! Exit codes: 0 success, 1 malformed configuration or usage, 2 degenerate
//! field (including a nodal set that is not transverse to a box face),
//! 3 numerical failure or a comparison outside tolerance.

pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use nodal_core::summation::with_threads;
use nodal_core::Error;

use commands::{cmd_compare, cmd_converge, cmd_estimate, write_output, Outcome};
use config::{Cli, Command, RunConfig};

pub const THREADS_ENV: &str = "NODAL_THREADS";

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::Domain { .. } => 1,
        Error::Degenerate { .. } | Error::Transversality { .. } => 2,
        Error::Numerical { .. } | Error::Resolution(_) => 3,
    }
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got '{s}'")),
        },
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let (args, min_res, cmd): (_, _, fn(&RunConfig, &mut String) -> nodal_core::Result<Outcome>) =
        match &cli.command {
            Command::Estimate(a) => (a, 1, cmd_estimate),
            Command::Compare(a) => (a, 1, cmd_compare),
            Command::Converge(a) => (a, 3, cmd_converge),
        };
    let cfg = match RunConfig::from_args(args, min_res) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let mut text = String::new();
    let result = match threads {
        Some(n) => with_threads(n, || cmd(&cfg, &mut text)),
        None => cmd(&cfg, &mut text),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = write_output(&cfg.out, &text) {
        eprintln!("error: out: {}: {e}", cfg.out);
        return 1;
    }
    match outcome {
        Outcome::Ok => 0,
        Outcome::OutOfTolerance(msg) => {
            eprintln!("error: {msg}");
            3
        }
    }
}
