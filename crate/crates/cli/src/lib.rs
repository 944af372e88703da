//! Library surface of the `sqz` command-line tool: argument definitions,
//! the command implementations, and the table reader/writer used for the
//! emitted files.

pub mod commands;
pub mod params;
pub mod table;
pub mod verify;

use clap::Parser;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<sqz_core::Error> for CliError {
    fn from(e: sqz_core::Error) -> Self {
        match e {
            sqz_core::Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "sqz",
    version,
    about = "Squeezing spectra for dispersive optical bistability",
    long_about = "Computes steady states, phase-space spectral matrices, output-field \
                  squeezing spectra and intracavity quadrature variances for a driven \
                  Kerr cavity, and cross-validates the analytic results against \
                  stochastic Langevin simulation.\n\n\
                  Parameters are given either in scaled form (--Delta with --mu or --I, \
                  optional --eta and --gamma) or in physical SI rates (--gamma, --theta, \
                  --g, --e0, all in 1/s). Frequencies are scaled (Omega = 2 omega / gamma) \
                  unless --unscaled-frequency is given. The environment variable \
                  SQZ_OUTPUT_DIR prefixes relative --output paths."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: commands::Command,
}
