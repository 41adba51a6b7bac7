//! `lexgeo` command-line front end.
//!
//! Exit status is 0 on success, 1 for usage, validation and experiment
//! errors, and 2 when an input or output file cannot be read or written.

mod config;
mod runners;

pub use config::{
    required_fields, validate_config, validate_for, Analysis, ResourcePaths, RunConfig,
    StorePaths, SynthSection, Violation,
};

use crate::experiments::ExperimentError;
use crate::store::StoreError;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "lexgeo",
    version,
    about = "Cross-lingual embedding geometry experiments over LGEO stores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Overrides; each takes precedence over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Contextual store.
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Number of principal directions removed.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<i64>,
    /// Layer number as recorded in the store.
    #[arg(long, global = true)]
    pub layer: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Mantel permutations.
    #[arg(long, global = true)]
    pub perms: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rank concepts by cross-lingual convergence.
    Convergence,
    /// Regress convergence on surface-form similarity.
    Surface,
    /// Convergence by semantic category.
    Categories,
    /// Compare convergence between the main and comparison stores.
    Compare,
    /// Ranking stability across correction strengths.
    Isotropy,
    /// Contextual against decontextual convergence.
    Carrier,
    /// Per-layer convergence and conceptual-store ratios.
    Layers,
    /// Mantel test against a reference language distance matrix.
    Phylo,
    /// Concept-pair similarity against colexification counts.
    Colex,
    /// Between/within concept distance ratio with bootstrap intervals.
    Storeratio,
    /// Principal-component map of basic color terms.
    Colors,
    /// Cross-language consistency of concept-pair offsets.
    Offsets,
    /// Two-dimensional map of concept centroids.
    Conceptmap,
    /// Write a synthetic fixture set and a config that runs on it.
    Synth,
    /// Run every experiment whose inputs are configured.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Surface => "surface",
            Command::Categories => "categories",
            Command::Compare => "compare",
            Command::Isotropy => "isotropy",
            Command::Carrier => "carrier",
            Command::Layers => "layers",
            Command::Phylo => "phylo",
            Command::Colex => "colex",
            Command::Storeratio => "storeratio",
            Command::Colors => "colors",
            Command::Offsets => "offsets",
            Command::Conceptmap => "conceptmap",
            Command::Synth => "synth",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Experiment(ExperimentError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Experiment(ExperimentError::Store(StoreError::Io { .. })) => 2,
            _ => 1,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Experiment(e)
    }
}

/// Loads the config file (if any) and applies flag overrides.
pub fn load_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            RunConfig::from_toml(&text, &base).map_err(|e| {
                CliError::Invalid(vec![Violation {
                    field: "config".into(),
                    constraint: format!("{}: {}", path.display(), e.message()),
                }])
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = &flags.store {
        cfg.stores.contextual = Some(s.clone());
    }
    if let Some(k) = flags.k {
        cfg.analysis.k = k;
    }
    if let Some(l) = flags.layer {
        cfg.analysis.layer = Some(l);
    }
    if let Some(s) = flags.seed {
        cfg.seed = Some(s);
    }
    if let Some(p) = flags.perms {
        cfg.analysis.perms = p;
    }
    if let Some(o) = &flags.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LEXGEO_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Invalid(vec![Violation {
                field: "LEXGEO_THREADS".into(),
                constraint: format!("must be a positive integer, got {v:?}"),
            }])
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))
}

/// Validates and runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let cfg = load_config(&cli.flags)?;
    let violations = validate_for(&cfg, name);
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    let pool = thread_pool()?;
    pool.install(|| runners::run(cli.command, &cfg))
}

/// Entry point: parses `args`, runs, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lexgeo {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
