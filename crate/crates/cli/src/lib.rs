//! Command-line driver for HFSM simulation and verification experiments.
//!
//! ```text
//! hfsmlab [--seed N] [--config FILE] [--out DIR] [--threads N] [--cache-dir DIR]
//!         [--<key> VALUE ...] <simulate|coeffs|modulus|lowerbound|validate|kernel-table>
//! ```
//!
//! Every configuration key has a flag spelled with dashes. Each command writes
//! its resolved `config.txt` into the output directory next to its artifacts.
//! Exit codes: 0 success, 1 I/O failure, 2 invalid parameter, domain or input,
//! 3 numeric failure or failed validation, 4 resource limit.

pub mod commands;
pub mod config;
pub mod report;
pub mod validate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use config::{flag_name, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    MissingInput(String),
    #[error("{0}")]
    ValidationFailed(String),
    #[error(transparent)]
    Core(#[from] hfsm_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hfsm_core::Error as E;
        match self {
            CliError::Parameter(_) | CliError::MissingInput(_) => 2,
            CliError::ValidationFailed(_) => 3,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::Parameter(_) | E::Domain(_) | E::Format(_) => 2,
                E::Numeric(_) => 3,
                E::Resource(_) => 4,
                E::Io(_) => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use hfsm_core::Error as E;
        match self {
            CliError::Parameter(_) => "parameter",
            CliError::MissingInput(_) => "missing_input",
            CliError::ValidationFailed(_) => "validation_failed",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                E::Parameter(_) => "parameter",
                E::Domain(_) => "domain",
                E::Format(_) => "format",
                E::Numeric(_) => "numeric",
                E::Resource(_) => "resource",
                E::Io(_) => "io",
            },
        }
    }

    /// The machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "hfsmlab", version, about = "Simulate and verify harmonizable fractional stable motion")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Kernel table cache; HFSMLAB_CACHE takes precedence
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Synthesize an ensemble of paths
    Simulate,
    /// Coefficient fields, growth regression and binomial counts
    Coeffs,
    /// Modulus-of-continuity profile and self-similarity of an ensemble
    Modulus {
        /// Ensemble file; defaults to OUT/ensemble.bin
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// Scale law and growth of the lower-bound functionals W_j
    Lowerbound {
        /// Ensemble file; defaults to OUT/ensemble.bin
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// Analytic-oracle self test
    Validate {
        #[arg(long, hide = true, value_name = "CHECK=FACTOR")]
        perturb: Option<String>,
    },
    /// Tabulate the fractional kernel
    KernelTable,
}

/// The parser with one flag per configuration key.
pub fn command() -> Command {
    let mut cmd = <Cli as clap::CommandFactory>::command();
    for (key, doc) in ExperimentConfig::KEYS.iter().zip(ExperimentConfig::DOCS) {
        cmd = cmd.arg(
            Arg::new(*key)
                .long(flag_name(key))
                .global(true)
                .value_name("VALUE")
                .allow_negative_numbers(true)
                .help(doc.trim().to_string()),
        );
    }
    cmd
}

/// Defaults, then the configuration file, then flags.
pub fn resolve_config(global: &GlobalArgs, matches: &ArgMatches) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &global.config {
        cfg.apply_file(path)?;
    }
    let sub = matches.subcommand().map(|(_, m)| m);
    for key in ExperimentConfig::KEYS {
        let value = sub
            .and_then(|m| m.get_one::<String>(key))
            .or_else(|| matches.get_one::<String>(key));
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

/// Cache directory: `HFSMLAB_CACHE`, then `--cache-dir`, then the system temp dir.
pub fn cache_dir(global: &GlobalArgs) -> PathBuf {
    match std::env::var_os("HFSMLAB_CACHE") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => global
            .cache_dir
            .clone()
            .unwrap_or_else(|| std::env::temp_dir().join("hfsmlab-cache")),
    }
}

/// Parses `args` and runs the command; clap's help and version requests come
/// back as `Ok(Some(text))`.
pub fn run<I, T>(args: I) -> Result<Option<String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Some(e.to_string())),
                _ => Err(CliError::Parameter(e.kind().to_string() + ": " + &e.render().to_string())),
            };
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Parameter(e.to_string()))?;
    let cfg = resolve_config(&cli.global, &matches)?;
    let ctx = commands::Context { cfg, out: cli.global.out.clone(), cache_dir: cache_dir(&cli.global) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
        .map_err(|e| CliError::Core(hfsm_core::Error::Resource(format!("thread pool: {e}"))))?;
    pool.install(|| commands::dispatch(&ctx, &cli.command)).map(Some)
}
