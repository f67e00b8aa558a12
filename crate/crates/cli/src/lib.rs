//! Command-line front end for `viproplab-core`.
//!
//! Every subcommand returns an [`Outcome`]: the text to emit and a
//! [`Status`] whose numeric code is the process exit code.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use viproplab_core::proplab::DEFAULT_KMAX;
use viproplab_core::{parse_rational, Rational};

pub mod commands;
pub mod figure;
pub mod problem;

/// Exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Mismatch,
    Inconclusive,
    /// Unreadable input, bad flags or an unwritable output.
    Parse,
    NotConverged,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Mismatch => 1,
            Status::Inconclusive => 2,
            Status::Parse => 3,
            Status::NotConverged => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] viproplab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        Status::Parse
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produced: `stdout` goes to the terminal (or nowhere when
/// written to `--out`), `notes` to stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "viproplab", version, about = "Exact checks of VI operator properties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate ‖∇u_k‖³ and Ψ(u_k, v_α) and compare them with their closed forms.
    Reproduce(ReproduceArgs),
    /// Ky–Fan violation certificate and pseudomonotone premise audit for the sawtooth family.
    Certify(SequenceArgs),
    /// Exact test integrals of ∇x_k against a fixed test family.
    WeakEvidence(WeakEvidenceArgs),
    /// Solve a discretised VI described by a JSON problem file.
    Solve(SolveArgs),
    /// ℓ² unit vectors with F = Id: the pairing <F(e_k), e_k − 0> along the sequence.
    #[command(name = "remark32")]
    L2Unit(L2UnitArgs),
    /// Write CSV plot data for u_k and ∇u_k.
    Figure(FigureArgs),
}

fn parse_alpha(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SequenceArgs {
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    pub kmax: u64,
    /// Hat scale α, as `p/q`.
    #[arg(long, default_value = "16", value_parser = parse_alpha, allow_hyphen_values = true)]
    pub alpha: Rational,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[command(flatten)]
    pub common: SequenceArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Override the expected value of ‖∇u_k‖³.
    #[arg(long, hide = true, value_parser = parse_alpha, allow_hyphen_values = true)]
    pub expect_norm: Option<Rational>,
}

#[derive(Debug, Clone, Args)]
pub struct WeakEvidenceArgs {
    #[command(flatten)]
    pub common: SequenceArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// One of `sawtooth`, `hat`, `l2unit`.
    #[arg(long, default_value = "sawtooth")]
    pub sequence: String,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Problem JSON file.
    pub problem: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct L2UnitArgs {
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    pub kmax: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 4)]
    pub k: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let (outcome, out) = match &cli.command {
        Command::Reproduce(a) => (commands::cmd_reproduce(a)?, a.common.out.as_deref()),
        Command::Certify(a) => (commands::cmd_certify(a)?, a.out.as_deref()),
        Command::WeakEvidence(a) => (commands::cmd_weak_evidence(a)?, a.common.out.as_deref()),
        Command::Solve(a) => (commands::cmd_solve(a)?, a.out.as_deref()),
        Command::L2Unit(a) => (commands::cmd_l2_unit(a)?, a.out.as_deref()),
        Command::Figure(a) => return figure::cmd_figure(a),
    };
    match out {
        Some(path) => {
            fs::write(path, &outcome.stdout).map_err(|e| CliError::io(path, e))?;
            Ok(Outcome {
                stdout: String::new(),
                ..outcome
            })
        }
        None => Ok(outcome),
    }
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T, context: &str) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        context: context.into(),
        source,
    })?;
    text.push('\n');
    Ok(text)
}
