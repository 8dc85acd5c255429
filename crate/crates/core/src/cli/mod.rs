//! Command-line driver: config ingestion, sweeps, CSV/JSON/SVG emission and
//! round-trip verification.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical or verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;
pub mod verify;

pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Static barrier transmission and matched amplitudes.
    Static,
    /// Quantized channel energies (energy circle).
    Spectrum,
    /// Per-channel and total transmission.
    Transmit,
    /// Traversal times in the exact, low- and high-frequency regimes.
    Traverse,
    /// Density of states over the channel ladder.
    Dos,
    /// Quantized channels side by side with the sideband ladder.
    TgCompare,
    /// Wave-packet propagation through the modulated barrier.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "dynbarrier", version, about = "Tunnelling through a time-modulated rectangular barrier")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Run descriptor (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized sweeps.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Re-read the emitted CSV and re-check module invariants.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Verify(_) | CliError::Io(_) => 2,
        }
    }
}

/// Everything a run produced, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub artifact: String,
    pub path: Option<PathBuf>,
    pub notes: Vec<String>,
    pub verified: Option<String>,
}

pub fn run(args: &Args) -> Result<RunOutput, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let cfg = RunConfig::parse(&text)?;
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(CliError::Validation(format!(
                "field `command`: config is for `{}`, invoked as `{}`",
                c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
                args.command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
            )));
        }
    }
    let format = args.format.or(cfg.output).unwrap_or(Format::Csv);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    if format == Format::Svg && args.command == Command::Traverse {
        return Err(CliError::Validation("svg output is not available for `traverse`".into()));
    }
    let points = cfg.points(seed)?;
    let out = commands::evaluate(args.command, &cfg, &points)?;

    let csv = out.table.to_csv()?;
    let verified = if args.verify {
        Some(verify::verify(args.command, &csv, &cfg, &points)?)
    } else {
        None
    };
    let artifact = match format {
        Format::Csv => csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Svg => match &out.plot {
            Some(p) => svg::render(p),
            None => return Err(CliError::Validation("no plot for this command".into())),
        },
    };
    Ok(RunOutput {
        artifact,
        path: args.out.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from)),
        notes: out.notes,
        verified,
    })
}

/// Parses `argv`, runs, writes the artifact and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args).and_then(|out| {
        for n in &out.notes {
            eprintln!("note: {n}");
        }
        match &out.path {
            Some(p) => fs::write(p, &out.artifact)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?,
            None => std::io::stdout()
                .write_all(out.artifact.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?,
        }
        if let Some(v) = &out.verified {
            eprintln!("{v}");
        }
        Ok(())
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
