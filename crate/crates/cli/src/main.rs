//! `thermocap`: interface profiles, wave speeds, scaling sweeps and
//! self-checks for a near-critical thermocapillary fluid.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 bad configuration, 3 solver
//! failure, 4 a scaling law or check failed (its report is still written).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermocap_core::scaling::ExponentTolerances;

use commands::{CliError, Context, Outcome};
use config::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "thermocap", version, about)]
struct Cli {
    /// JSON run configuration; the reference fluid at delta_T = 0.01 if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tabular artifacts to write (overrides `format` in the config).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized checks, recorded in every output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Use the full two-field boundary-value solver instead of the tanh profile.
    #[arg(long, global = true)]
    full: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interface profile and observables.
    Profile,
    /// Acceleration-wave speed at the dividing surface or a given locus.
    Celerity {
        /// Override locus, e.g. "rho=1.0 a=0 g2=1.25e-9".
        #[arg(long)]
        locus: Option<String>,
    },
    /// Sweep delta_T and fit the power laws.
    Sweep {
        /// Exponent tolerance for closed-form columns.
        #[arg(long, default_value_t = ExponentTolerances::default().closed)]
        tol_closed: f64,
        /// Exponent tolerance for columns measured on full-solver profiles.
        #[arg(long, default_value_t = ExponentTolerances::default().full)]
        tol_full: f64,
    },
    /// Run the invariant suite and print a pass/fail table.
    Check,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    let ctx = Context {
        out_dir: cli
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        format: cli.format.or(config.format).unwrap_or(Format::Csv),
        seed: cli.seed,
        full: cli.full,
        config,
    };

    let outcome: Outcome = match &cli.command {
        Command::Profile => commands::profile(&ctx)?,
        Command::Celerity { locus } => commands::celerity(&ctx, locus.as_deref())?,
        Command::Sweep {
            tol_closed,
            tol_full,
        } => {
            for (name, t) in [("--tol-closed", tol_closed), ("--tol-full", tol_full)] {
                if *t <= 0.0 || !t.is_finite() {
                    return Err(CliError::Config(format!(
                        "{name} must be positive, got {t}"
                    )));
                }
            }
            let tolerances = ExponentTolerances {
                closed: *tol_closed,
                full: *tol_full,
            };
            commands::sweep(&ctx, &tolerances)?
        }
        Command::Check => {
            let (outcome, report) = commands::check(&ctx)?;
            print!("{}", commands::check_table(&report));
            outcome
        }
    };
    for path in outcome.write(&ctx.out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("thermocap: one or more laws or checks failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("thermocap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
