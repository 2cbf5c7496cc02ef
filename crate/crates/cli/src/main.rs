//! `sasaki`: verification suites, invariant evaluation, sweeps and flow runs
//! for the weighted Sasakian 3-spheres.
//!
//! Exit status: 0 on success, 1 when a numerical check misses its bound (or
//! output cannot be written), 2 on invalid input.

mod commands;
mod config;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, RunConfig};

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Output(_) => 1,
        }
    }
}

impl From<sasaki_core::Error> for Failure {
    fn from(e: sasaki_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Output(e.to_string())
    }
}

/// Whether every check of a command met its bound.
pub type Outcome = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Output(m) => eprintln!("error writing output: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
