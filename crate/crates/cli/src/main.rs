mod args;
mod commands;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stegosonic_core::transfer::TransferError;

use crate::args::Cli;

/// Exit code 1 for usage problems, 2 for everything the operation itself rejected.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Declined,
    Core(stegosonic_core::Error),
    Transfer(TransferError),
    Io(PathBuf, io::Error),
}

impl CliError {
    fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Declined => "Declined",
            CliError::Core(e) => e.name(),
            CliError::Transfer(e) => e.name(),
            CliError::Io(..) => "Io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Declined => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Declined => f.write_str("not confirmed, nothing written"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Transfer(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<stegosonic_core::Error> for CliError {
    fn from(e: stegosonic_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        CliError::Transfer(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}
