//! Command-line front-end: rule generation, seed-instance generation,
//! seeded experiment batches and their statistical analysis.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use acpso::evolve::Strategy;
use acpso::problems::PackKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod analyze;
pub mod genmodel;
pub mod rulegen;
pub mod run;

/// Version string of the result formats written by `run` and `analyze`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "acpso", version, about = "Consistency-preserving search operators for model-driven optimisation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the operator rules of a metamodel and dump them as JSON.
    Rulegen(RulegenArgs),
    /// Generate a random seed instance for a case study.
    Genmodel(GenmodelArgs),
    /// Run a batch of seeded searches.
    Run(RunArgs),
    /// Summarise and compare result directories written by `run`.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Problem,
    Solution,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSource {
    Generated,
    Manual,
}

#[derive(Clone, Debug, Args)]
pub struct RulegenArgs {
    /// Built-in case study to generate for.
    #[arg(long, conflicts_with = "metamodel", required_unless_present = "metamodel")]
    pub pack: Option<PackKind>,
    /// Metamodel JSON file (refinements are the solution constraints).
    #[arg(long)]
    pub metamodel: Option<PathBuf>,
    /// Mutable node types (with --metamodel; default: all concrete types).
    #[arg(long, value_delimiter = ',')]
    pub scope_nodes: Option<Vec<String>>,
    /// Mutable edge types (with --metamodel; default: all edge types).
    #[arg(long, value_delimiter = ',')]
    pub scope_edges: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "both")]
    pub phase: PhaseArg,
    /// Upper limit on combined repair variants per node type.
    #[arg(long, default_value_t = acpso::rulegen::DEFAULT_COMBINATION_CAP)]
    pub combination_cap: usize,
    /// Output file (default: stdout).
    #[arg(long, alias = "out")]
    pub dump: Option<PathBuf>,
    /// Record the generating table cells of every rule.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Clone, Debug, Args)]
pub struct GenmodelArgs {
    #[arg(long)]
    pub pack: PackKind,
    /// Comma-separated size parameters.
    #[arg(long, value_delimiter = ',', conflicts_with = "preset", required_unless_present = "preset")]
    pub size: Option<Vec<usize>>,
    /// Named input-model shape, e.g. A.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub pack: PackKind,
    /// Seed instance JSON file.
    #[arg(long, conflicts_with_all = ["size", "preset"])]
    pub instance: Option<PathBuf>,
    /// Generate the seed instance from these size parameters.
    #[arg(long, value_delimiter = ',', conflicts_with = "preset")]
    pub size: Option<Vec<usize>>,
    /// Generate the seed instance from a named shape.
    #[arg(long)]
    pub preset: Option<String>,
    /// Seed of the generated instance.
    #[arg(long, default_value_t = 0)]
    pub instance_seed: u64,
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 500)]
    pub evolutions: usize,
    #[arg(long, default_value = "classic")]
    pub strategy: Strategy,
    /// Base seed; repetition i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub repetitions: usize,
    #[arg(long, value_enum, default_value = "generated")]
    pub operators: OperatorSource,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct AnalyzeArgs {
    /// Result directories, one per configuration.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Summary JSON file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance for matching reference-set points.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
}

/// Failure of a subcommand together with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    /// Bad input: missing or malformed files, invalid parameters.
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: 2, error: error.into() }
    }

    pub fn failed(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: 1, error: error.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Rulegen(args) => rulegen::cmd_rulegen(&args),
        Command::Genmodel(args) => genmodel::cmd_genmodel(&args),
        Command::Run(args) => run::cmd_run(&args).map(|_| ()),
        Command::Analyze(args) => analyze::cmd_analyze(&args).map(|_| ()),
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::input(anyhow::anyhow!("{}: {e}", path.display()))
    })
}

/// Pretty JSON with a trailing newline, to `path` or stdout.
pub(crate) fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::failed)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::failed(anyhow::anyhow!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(CliError::failed),
    }
}
