//! Command-line orchestration for radwave: config ingestion, experiment
//! execution, and reproducible run directories.
//!
//! ```text
//! radwave validate|simulate|linearize|inequalities --config <path> [--out <dir>] [--threads <k>]
//! ```
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 gate failure
//! (energy drift, trend, verdict), 3 numerical abort (overflow, CFL, wall).

pub mod commands;
pub mod config;
pub mod persist;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde_json::json;
use thiserror::Error;

pub use config::{ingest, Command, ExperimentConfig};
use persist::RunDir;

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "RADWAVE_OUT";
const DEFAULT_OUT_ROOT: &str = "runs";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("gate failure: {0}")]
    Gate(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Gate(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "radwave", version, about = "Radial semilinear wave laboratory")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Run directory; defaults to `$RADWAVE_OUT/<config stem>-<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// `--out`, then the config's `output`, then the output root.
pub fn run_directory(cli: &Cli, config: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &cli.out {
        return out.clone();
    }
    if let Some(out) = &config.output {
        return out.clone();
    }
    let root = std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
    let stem = cli
        .config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    root.join(format!("{stem}-{}", cli.command.name()))
}

/// Runs one command and returns the run directory.
pub fn run(cli: &Cli) -> Result<PathBuf, RunError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(RunError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    let config = ingest(&cli.config, cli.command)?;
    let dir = RunDir::create(run_directory(cli, &config))?;
    let start = Instant::now();
    let outcome = commands::execute(cli.command, &config, &dir);
    let wall = start.elapsed().as_secs_f64();

    let (summary, files, failure) = match outcome {
        Ok(o) => (o.summary, o.files, o.failure),
        Err(e) => (serde_json::Value::Null, Vec::new(), Some(e)),
    };
    let manifest = json!({
        "command": cli.command.name(),
        "config_path": cli.config.display().to_string(),
        "config": config,
        "code_version": env!("CARGO_PKG_VERSION"),
        "platform": format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH),
        "threads": rayon::current_num_threads(),
        "wall_time_seconds": wall,
        "exit_code": failure.as_ref().map_or(0, RunError::exit_code),
        "error": failure.as_ref().map(|e| e.to_string()),
        "files": files,
        "results": summary,
    });
    dir.write_json("manifest.json", &manifest)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(dir.path().to_path_buf()),
    }
}

/// Parses `args`, runs, reports on stderr, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(dir) => {
            println!("results in {}", display(&dir));
            0
        }
        Err(e) => {
            eprintln!("radwave: {e}");
            e.exit_code()
        }
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
