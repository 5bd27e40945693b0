//! `ainfcyc` command line front-end: check / tilde / equivalence /
//! darboux over JSON fixture files. Exit codes: 0 pass, 1 check failure,
//! 2 precondition rejection, 3 mathematical obstruction, 4 input error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use ainfcyc::Rational;
use ainfcyc_cli::commands::{cmd_check, cmd_darboux, cmd_equivalence, cmd_tilde, Failure, Flags};
use ainfcyc_cli::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "ainfcyc", about = "A-infinity / cyclic homology pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Truncation order override (word length)
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Energy cutoff override for filtered inputs, as a rational
    #[arg(long = "energy-cutoff", global = true)]
    energy_cutoff: Option<String>,
    /// Seed for generated inputs; commands without it are deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Proceed past a failed cocycle validation, emitting the defect
    #[arg(long, global = true)]
    force: bool,
    /// Path for the emitted artifact (store / certificate / transform)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra file: structure relations, unit, gapped
    /// conditions, cyclicity against the stored pairing
    Check { algebra: PathBuf },
    /// Build the bimodule map of a negative cyclic cocycle and verify the
    /// strong homotopy inner product conditions
    Tilde { algebra: PathBuf, cocycle: Option<PathBuf> },
    /// Construct the automorphism relating a perturbed form back to the
    /// constant symplectic form
    Equivalence { algebra: PathBuf, eta: PathBuf },
    /// Normalize a closed nondegenerate two-form to its constant part
    Darboux { form: PathBuf },
}

fn run(cli: &Cli) -> Result<report::RunReport, Failure> {
    let energy_cutoff = match &cli.energy_cutoff {
        Some(s) => Some(
            Rational::from_str(s)
                .map_err(|e| Failure::input(format!("bad --energy-cutoff {s:?}: {e}")))?,
        ),
        None => None,
    };
    let flags = Flags {
        order: cli.order,
        energy_cutoff,
        seed: cli.seed,
        force: cli.force,
        output: cli.output.clone(),
    };
    match &cli.command {
        Command::Check { algebra } => cmd_check(algebra, &flags),
        Command::Tilde { algebra, cocycle } => cmd_tilde(algebra, cocycle.as_deref(), &flags),
        Command::Equivalence { algebra, eta } => cmd_equivalence(algebra, eta, &flags),
        Command::Darboux { form } => cmd_darboux(form, &flags),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Json => print!("{}", report.to_json()),
                Format::Text => {
                    print!("{}", report.to_text());
                    // timing stays off the machine-readable stream so
                    // report files are byte-deterministic
                    eprintln!("elapsed: {} ms", start.elapsed().as_millis());
                }
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
