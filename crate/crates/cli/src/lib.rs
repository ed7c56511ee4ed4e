//! Batch front end for the `landau` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Context;
use crate::output::{fmt_f64, Outputs, RunProvenance};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("computation failed: {0}")]
    Compute(landau_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<landau_core::Error> for CliError {
    fn from(e: landau_core::Error) -> Self {
        use landau_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidConstruction(_)
            | E::Degenerate(_)
            | E::UnsupportedProfile(_)
            | E::OrderOutOfRange { .. } => CliError::Config(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "landau", version, about = "Spectra of perturbed Landau Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Quadrature order override.
    #[arg(long, global = true)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    LowerBranchSign,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weyl, anti-Wick and Fourier-side eigenvalues of a radial symbol.
    RadialEigs,
    /// Spectrum of the truncated Landau Hamiltonian plus a perturbation.
    Spectrum,
    /// Toeplitz eigenvalues of a radial weight and their asymptotic residuals.
    Toeplitz,
    /// Fekete-point estimate of a logarithmic capacity.
    Capacity,
    /// Asymptotic predictions and coefficient tables.
    Asymptotics,
    /// Perturbation with prescribed eigenvalue counts in the spectral gaps.
    ConstructNp51,
    /// Runs the identity suites.
    Verify {
        /// Run a single suite.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

fn verify_cmd(ctx: &Context, filter: Option<&str>, fault: Option<FaultArg>) -> Result<Vec<PathBuf>, CliError> {
    let fault = fault.map(|FaultArg::LowerBranchSign| verify::Fault::LowerBranchSign);
    let rows = verify::run(filter, fault).map_err(CliError::Config)?;
    let mut prov = RunProvenance::new("verify", ctx.loaded.as_ref().map(|l| l.sha256.clone()));
    if fault.is_some() {
        prov.warnings.push("fault injected: lower-branch-sign".into());
    }
    for r in &rows {
        println!(
            "{:<5} {:<11} {:>10.3e} < {:<8.1e} {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.max_error,
            r.tolerance,
            r.seconds,
            r.identity
        );
    }
    let mut out = Outputs::new(&ctx.out)?;
    let table = rows.iter().map(|r| {
        vec![
            r.suite.to_string(),
            r.identity.clone(),
            fmt_f64(r.max_error),
            fmt_f64(r.tolerance),
            if r.passed { "pass" } else { "fail" }.to_string(),
        ]
    });
    out.csv(
        "verify.csv",
        &prov,
        &["suite", "identity", "max_error", "tolerance", "status"],
        table,
    )?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: {}", r.suite, r.identity))
        .collect();
    if failed.is_empty() {
        Ok(out.written)
    } else {
        Err(CliError::Assertion(failed.join("; ")))
    }
}

/// Runs a parsed command line and returns the written files.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let loaded = cli.config.as_deref().map(config::load).transpose()?;
    let ctx = Context {
        loaded,
        seed: cli.seed,
        order: cli.order,
        out: cli.out,
    };
    match &cli.command {
        Command::RadialEigs => commands::radial_eigs(&ctx),
        Command::Spectrum => commands::spectrum(&ctx),
        Command::Toeplitz => commands::toeplitz(&ctx),
        Command::Capacity => commands::capacity(&ctx),
        Command::Asymptotics => commands::asymptotics(&ctx),
        Command::ConstructNp51 => commands::construct_np51_cmd(&ctx),
        Command::Verify { filter, inject_fault } => verify_cmd(&ctx, filter.as_deref(), *inject_fault),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
