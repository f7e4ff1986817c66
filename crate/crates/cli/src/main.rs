mod commands;

use clap::{Args, Parser, Subcommand};
use orbitforge::Error;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orbitforge", version, about = "Forge, count and grow periodic orbits of area-preserving maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "orbitforge-out")]
    pub out: PathBuf,
    /// Overrides the seed recorded in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print `key=value` event lines to stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Forge one resonant perturbation and census it.
    Forge(ConfigArg),
    /// Run a multi-stage growth campaign.
    Cascade(ConfigArg),
    /// Standalone periodic-orbit census.
    Census(ConfigArg),
    /// Solve for an invariant circle.
    Kam(ConfigArg),
    /// Plateau perturbations of the unimodal interval model.
    Interval(ConfigArg),
    /// Diophantine certificate of a rotation number.
    Certify(CertifyArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
pub struct CertifyArgs {
    /// `golden` or a decimal number; overrides the config.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub qmax: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit code 2.
    Validation { kind: String, message: String },
    /// Numerical failure: exit code 3.
    Numeric { kind: String, message: String },
}

impl Failure {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Failure::Validation { kind: kind.into(), message: message.into() }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Validation { .. } => 2,
            Failure::Numeric { .. } => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, message) = (e.kind().to_string(), e.to_string());
        if e.is_validation() {
            Failure::Validation { kind, message }
        } else {
            Failure::Numeric { kind, message }
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    status: &'a str,
    exit_code: u8,
    kind: &'a str,
    message: &'a str,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common.clone();
    let result = match &cli.command {
        Command::Forge(a) => commands::forge(&a.config, &common),
        Command::Cascade(a) => commands::cascade(&a.config, &common),
        Command::Census(a) => commands::census(&a.config, &common),
        Command::Kam(a) => commands::kam(&a.config, &common),
        Command::Interval(a) => commands::interval(&a.config, &common),
        Command::Certify(a) => commands::certify(a, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let code = failure.code();
            let (status, kind, message) = match &failure {
                Failure::Validation { kind, message } => ("validation_error", kind, message),
                Failure::Numeric { kind, message } => ("numeric_failure", kind, message),
            };
            let report = ErrorReport { status, exit_code: code, kind, message };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            eprintln!("{text}");
            if std::fs::create_dir_all(&common.out).is_ok() {
                let _ = std::fs::write(common.out.join("error.json"), format!("{text}\n"));
            }
            ExitCode::from(code)
        }
    }
}
