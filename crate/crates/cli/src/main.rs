//! `tricf`: spectra, singular values, wavefunctions and diagnostics of
//! tridiagonal Hamiltonians from the command line.
//!
//! Exit codes: 0 when every requested threshold holds, 1 when a threshold
//! fails (the output is still written), 2 on invalid input or errors.

mod commands;
mod model;
mod report;
mod settings;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::report::Report;
use crate::settings::{Resolved, Settings};

#[derive(Debug, Parser)]
#[command(name = "tricf", version, about = "Continued-fraction spectra and singular values of tridiagonal Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complex eigenvalues inside a search box, with winding-count certificate.
    Spectrum(Settings),
    /// Singular values from the hermitized operator.
    Singular(Settings),
    /// Right and left eigenvectors at a given energy.
    Wavefunction(Settings),
    /// Secular function (or determinant) sampled on a grid.
    GreenGrid(Settings),
    /// Factorization and determinant identities at random shifts.
    FactorCheck(Settings),
    /// Fraction roots matched against the dense determinant scan.
    OracleCompare(Settings),
    /// Model catalogue, or the coefficients of the selected model.
    Models(Settings),
}

fn run(cli: Cli) -> Result<(Report, Resolved)> {
    let (settings, task): (Settings, fn(&Resolved, bool) -> Result<Report>) = match cli.command {
        Command::Spectrum(s) => (s, |c, _| commands::spectrum_cmd(c)),
        Command::Singular(s) => (s, |c, _| commands::singular_cmd(c)),
        Command::Wavefunction(s) => (s, |c, _| commands::wavefunction_cmd(c)),
        Command::GreenGrid(s) => (s, |c, _| commands::green_grid_cmd(c)),
        Command::FactorCheck(s) => (s, |c, _| commands::factor_check_cmd(c)),
        Command::OracleCompare(s) => (s, |c, _| commands::oracle_compare_cmd(c)),
        Command::Models(s) => (s, commands::models_cmd),
    };
    let settings = settings.with_file()?;
    let cfg = settings.resolve()?;
    let report = task(&cfg, settings.model.is_some())?;
    Ok((report, cfg))
}

fn emit(report: &Report, cfg: &Resolved) -> Result<()> {
    let bytes = report.render(cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            Ok(out.flush()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli).and_then(|(report, cfg)| emit(&report, &cfg).map(|_| report));
    match outcome {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(report) => {
            for f in &report.failures {
                eprintln!("tricf: threshold failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("tricf: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
