//! `inextensa`: verification pipelines for universal deformations of
//! fiber-reinforced solids. Exit codes: 0 pass, 1 numerical failure,
//! 2 input error.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use inextensa_core::Error;

use config::{parse_point, CommonArgs, RunConfig};

/// Why a run did not produce a passing result.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::DomainConflict(_)
            | Error::InvalidDomain(_)
            | Error::NotSpd { .. }
            | Error::NonFinite
            | Error::OutsideDomain { .. }
            | Error::NotUnit { .. }
            | Error::InconsistentInitialData { .. } => Failure::Input(e.to_string()),
            Error::SingularMetric { .. }
            | Error::SingularMap { .. }
            | Error::NotSkew { .. }
            | Error::NotOrthogonal { .. }
            | Error::NotFlat { .. }
            | Error::DegenerateDenominator { .. }
            | Error::ZeroDenominator
            | Error::BlowUp { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "inextensa",
    version,
    about = "Verify and reconstruct universal deformations of fiber-reinforced solids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base point `x,y,z` where the map is anchored; defaults to the lower
    /// corner of the domain.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, flatness, universality and equilibrium checks of a family.
    VerifyFamily(CommonArgs),
    /// Flatness, universality residuals and invariant case of a strain field.
    CheckMetric(CommonArgs),
    /// Rebuild the deformation from a flat strain field.
    Reconstruct(ReconstructArgs),
    /// Boundary shell of a deformed family block as OBJ or JSON.
    ExportMesh(CommonArgs),
    /// Integrate flat profile data and match it to a solution branch.
    Classify(CommonArgs),
}

fn run(cli: Cli) -> Result<commands::Outcome, Failure> {
    let (common, base) = match &cli.command {
        Command::Reconstruct(r) => (&r.common, r.base.as_deref()),
        Command::VerifyFamily(c)
        | Command::CheckMetric(c)
        | Command::ExportMesh(c)
        | Command::Classify(c) => (c, None),
    };
    let cfg = RunConfig::from_args(common)?;
    let result = match &cli.command {
        Command::VerifyFamily(_) => commands::verify_family(&cfg),
        Command::CheckMetric(_) => commands::check_metric(&cfg),
        Command::Reconstruct(_) => base
            .map(|b| parse_point("base", b))
            .transpose()
            .and_then(|b| commands::reconstruct(&cfg, b)),
        Command::ExportMesh(_) => commands::export_mesh(&cfg),
        Command::Classify(_) => commands::classify(&cfg),
    };
    let outcome = result?;
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => std::io::stdout().write_all(outcome.body.as_bytes()),
    };
    written.map_err(|e| Failure::Input(format!("cannot write output: {e}")))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => {
            eprintln!("{}", o.summary);
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
