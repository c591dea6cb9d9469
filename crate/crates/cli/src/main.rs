use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genus_weil::Error;
use serde_json::Value;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "genus-weil",
    version,
    about = "Evaluate genus characters of the class-group action on oriented elliptic curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print JSON on stdout.
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,
    /// Print a human-readable table on stdout (the default).
    #[arg(long, global = true)]
    pub table: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an oriented curve, optionally with a planted target curve.
    GenInstance(commands::GenArgs),
    /// Evaluate characters at the class connecting an instance and a target.
    EvalChar(commands::EvalArgs),
    /// Run the DDH distinguishing experiment.
    DdhExperiment(commands::DdhArgs),
    /// Recover [c] from [c]^2 and the curves E, [c]E.
    SqrtRecover(commands::SqrtArgs),
    /// Run the built-in invariant checks.
    Selftest(commands::SelftestArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FaultArg {
    InvertedPairing,
    DeltaFormula,
}

/// Result of a command: JSON for files and --json, text for the table view.
pub struct Outcome {
    pub json: Value,
    pub table: String,
    pub exit: u8,
}

/// An error together with the exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Attack { .. } | Error::Arithmetic(_) => 3,
            Error::Infeasible(_) | Error::InvalidParameter(_) | Error::Format(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{} is not valid JSON: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let common = cli.common;
    let outcome = match cli.command {
        Command::GenInstance(a) => commands::gen_instance(&a, &common)?,
        Command::EvalChar(a) => commands::eval_char(&a, &common)?,
        Command::DdhExperiment(a) => commands::ddh_experiment(&a, &common)?,
        Command::SqrtRecover(a) => commands::sqrt_recover(&a, &common)?,
        Command::Selftest(a) => commands::selftest(&a, &common)?,
    };
    if let Some(path) = &common.out {
        write_json(path, &outcome.json)?;
    }
    if common.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&outcome.json).expect("values serialize")
        );
    } else {
        print!("{}", outcome.table);
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
