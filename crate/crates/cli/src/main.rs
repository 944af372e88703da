//! `sqz` — squeezing spectra, quadrature variances and Langevin validation
//! for dispersive optical bistability.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numeric error (instability, divergence, failed factorization).

use clap::Parser;
use sqz_cli::{commands, Cli, CliError};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (label, msg) = match &err {
                CliError::Usage(m) => ("usage error", m),
                CliError::Numeric(m) => ("numeric error", m),
                CliError::Verification(m) => ("verification failure", m),
                CliError::Io(m) => ("io error", m),
            };
            eprintln!("sqz: {label}: {msg}");
            ExitCode::from(err.exit_code())
        }
    }
}
