//! Command implementations behind the `cosmic-bell` binary.

mod commands;
mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use cosmic_bell::config::RunConfig;

pub use commands::{
    analyze, plan, report, simulate, spectra, AnalyzeOutput, ConfiguredPair, PlanReport, ReportOutput, SimulateOutput,
    StarSpectra, StreamSummary, Summary,
};

#[derive(Debug, Parser)]
#[command(
    name = "cosmic-bell",
    version,
    about = "Plan, simulate and analyze astronomical-setting Bell tests"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set simulation.seed=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Human-readable table instead of JSON.
    #[arg(long, global = true)]
    pub table: bool,
    /// Write the result here instead of stdout (a directory for `simulate`).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank catalogue star pairs and report validity and lookback times.
    Plan,
    /// Wrong-way fractions of the configured stars.
    Spectra,
    /// Generate synthetic time-tag streams with truth labels.
    Simulate,
    /// Full statistical analysis of time-tag streams or count tables.
    Analyze {
        /// Time-tag file (binary, or text when the name ends in `.txt`).
        #[arg(long, conflicts_with = "tables")]
        streams: Option<PathBuf>,
        /// Count-table JSON; defaults to `analysis.tables` in the config.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Figure data and headline numbers from an analysis.
    Report {
        /// Output of `analyze`; the analysis is run afresh when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::BadInput(m) => write!(f, "bad input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cosmic_bell::Error> for CliError {
    fn from(e: cosmic_bell::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::BadInput("--config is required".into()))?;
    RunConfig::load(path, &cli.overrides).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let v = cosmic_bell::bellstats::to_report_json(value).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Run a parsed command line and render its output.
pub fn run(cli: &Cli) -> CliResult<Rendered> {
    let cfg = load_config(cli)?;
    let text = match &cli.command {
        Command::Plan => {
            let r = plan(&cfg)?;
            if cli.table {
                table::plan(&r)
            } else {
                json(&r)?
            }
        }
        Command::Spectra => {
            let r = spectra(&cfg)?;
            if cli.table {
                table::spectra(&r)
            } else {
                json(&r)?
            }
        }
        Command::Simulate => {
            let dir = cli
                .out
                .clone()
                .or_else(|| cfg.outputs.dir.as_ref().map(|d| cfg.resolve(d)))
                .ok_or_else(|| CliError::BadInput("simulate needs --out or outputs.dir".into()))?;
            let r = simulate(&cfg, &dir)?;
            let text = if cli.table { table::simulate(&r) } else { json(&r)? };
            return Ok(Rendered { text });
        }
        Command::Analyze { streams, tables } => {
            let r = analyze(&cfg, streams.as_deref(), tables.as_deref())?;
            if cli.table {
                table::analyze(&r)
            } else {
                json(&r)?
            }
        }
        Command::Report { input } => {
            let r = report(&cfg, input.as_deref())?;
            if cli.table {
                table::report(&r)
            } else {
                json(&r)?
            }
        }
    };
    if let Some(path) = &cli.out {
        std::fs::write(path, &text)?;
        return Ok(Rendered { text: String::new() });
    }
    Ok(Rendered { text })
}
