//! Command-line front end for `densewalk`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
//! violation.

pub mod args;
pub mod benchmark;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use densewalk::Error;

pub use args::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.root() {
                Error::InvalidParameter { .. } => 1,
                Error::Invariant(_) => 3,
                _ => 2,
            },
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let cli = match config::parse_with_config(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool installed by an earlier call in the same process stays
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            log::debug!("global thread pool already initialized");
        }
    }
    commands::dispatch(&cli)
}
