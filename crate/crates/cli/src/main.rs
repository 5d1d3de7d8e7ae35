//! `parasketch approx|verify|bench --config <path>`
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! (or timing assertion) failure, 3 numerical precondition or bound
//! hypothesis violated.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Loaded;

#[derive(Parser)]
#[command(
    name = "parasketch",
    version,
    about = "Low-rank approximation of parameter-dependent matrices with constant random sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep ranks and write the mean/min/max L² error per method.
    Approx(Common),
    /// Monte Carlo checks of the expectation and tail bounds.
    Verify(Common),
    /// Offline / online / direct timings for an affine model.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `base_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, env = "PARASKETCH_THREADS")]
    threads: Option<usize>,
    /// Report timings without asserting them.
    #[arg(long)]
    skip_timing_asserts: bool,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<parasketch::Error> for Failure {
    fn from(e: parasketch::Error) -> Self {
        use parasketch::Error as E;
        match e {
            E::Hypothesis(_) | E::Precondition(_) | E::NonFinite { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (common, which) = match command {
        Command::Approx(c) => (c, "approx"),
        Command::Verify(c) => (c, "verify"),
        Command::Bench(c) => (c, "bench"),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    let mut loaded = Loaded::read(&common.config)?;
    if let Some(seed) = common.seed {
        loaded.config.base_seed = seed;
    }
    match which {
        "approx" => commands::approx(&loaded),
        "verify" => commands::verify(&loaded),
        _ => commands::bench(&loaded, common.skip_timing_asserts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
