//! Batch driver for kglab: config parsing, commands and report output.
//!
//! Exit codes: 0 all PASS, 1 any FAIL, 2 any INCONCLUSIVE, 3 config or
//! input error.

pub mod cmd;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ConfigError;
use crate::report::{Output, Status};

/// Environment variable supplying the default output directory.
pub const OUT_ENV: &str = "KGLAB_OUT";
pub const DEFAULT_OUT: &str = "kglab-out";

pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kglab", version, about = "Commutator-kernel laboratory for free Klein-Gordon fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: config `output_dir`, else ./kglab-out].
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Tabulate Δ_A(f, g) for the configured pairs.
    Pair,
    /// Run the verification suites.
    Verify,
    /// Classify principal square roots of polynomial symbols.
    SqrtAnalyze,
    /// Truncated Fock-space commutators and relative-locality probes.
    Fock,
    /// Slice data of the gray support region for a causal x.
    Figure1,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Input(String),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Input(e) => write!(f, "input error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<kglab_core::Error> for RunError {
    fn from(e: kglab_core::Error) -> Self {
        RunError::Input(e.to_string())
    }
}

pub fn execute(cli: &Cli) -> Result<Status, RunError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| RunError::Input("--config <path> is required".into()))?;
    let mut loaded = config::load(path)?;
    if let Some(seed) = cli.seed {
        loaded.config.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| loaded.config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(RunError::Input("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::Io(e.to_string()))?;
    pool.install(|| {
        let plan = match cli.command {
            Command::Pair => cmd::pair::plan(&loaded),
            Command::Verify => cmd::verify::plan(&loaded),
            Command::SqrtAnalyze => cmd::sqrt::plan(&loaded),
            Command::Fock => cmd::fock::plan(&loaded),
            Command::Figure1 => cmd::figure1::plan(&loaded),
        }?;
        // Everything is validated before the output directory is touched.
        let out = Output::create(&dir)?;
        plan.run(&loaded, &out)
    })
}

/// Parses arguments, runs, prints a summary and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(status) => {
            println!("{}", status.as_str());
            status.exit_code()
        }
        Err(e) => {
            eprintln!("kglab: {e}");
            EXIT_CONFIG
        }
    }
}
