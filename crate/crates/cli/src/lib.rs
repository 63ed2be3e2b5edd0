//! Command-line front end: `solve`, `scan` and `check`.
//!
//! Exit codes: 0 success, 1 invalid flags or input, 2 convergence failure or
//! failed check, 3 scan with fewer than 90% successful grid points.

mod args;
mod check;
mod output;
mod scan;
mod solve;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{CheckArgs, Cli, Command, ProblemArgs, ScanArgs, SolveArgs, ToleranceArgs};
pub use output::{read_profile_csv, run_id, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_SCAN_INCOMPLETE: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: msg.into(),
        }
    }

    fn from_core_usage(e: sn_bound::Error) -> Self {
        Self::usage(e.to_string())
    }

    /// Invalid parameters are usage errors; anything else is a failure of the
    /// named stage.
    fn stage(stage: &str, e: sn_bound::Error) -> Self {
        match e {
            sn_bound::Error::InvalidParameter(_) => Self::usage(e.to_string()),
            _ => Self::failure(format!("{stage}: {e}")),
        }
    }

    fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        Self::usage(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Messages go to stderr; `check` writes its report to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Solve(a) => solve::run(a, &command_line),
        Command::Scan(a) => scan::run(a, &command_line),
        Command::Check(a) => check::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
