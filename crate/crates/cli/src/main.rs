use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod manifest;

/// Bad input: configuration, arguments or files. Exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// A reconstruction diverged. Exit code 3.
#[derive(Debug)]
pub struct Diverged(pub String);

impl fmt::Display for Diverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Diverged {}

#[derive(Parser)]
#[command(name = "pftycho", version, about = "Partial Fourier transforms and ptychographic reconstruction")]
struct Cli {
    /// Worker threads for the transform kernels.
    #[arg(long, global = true, env = "PFTYCHO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Full-transform PIE with the known probe.
    Pie,
    /// Full-transform ePIE, probe estimated jointly.
    Epie,
    /// Partial-transform warm start on cropped data, then full sweeps.
    Hybrid,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pie => "pie",
            Algorithm::Epie => "epie",
            Algorithm::Hybrid => "hybrid",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate diffraction data for an experiment.
    Simulate {
        config: PathBuf,
        /// Override a configuration key, e.g. `--set scan.shift=100`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Reconstruct from simulated data.
    Reconstruct {
        config: PathBuf,
        #[arg(short, long, value_enum)]
        algorithm: Algorithm,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Time the partial transform against a full FFT and check its accuracy.
    PftBench {
        /// Square input sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [1024, 2048, 4096])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        half_width: usize,
        #[arg(long, default_value_t = 64)]
        p: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-7])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute image metrics for a saved reconstruction.
    Metrics {
        /// Reconstructed object (`.ptyc`).
        recon: PathBuf,
        /// Ground-truth object (`.ptyc`).
        #[arg(long, conflicts_with_all = ["truth_magnitude", "truth_phase"])]
        truth: Option<PathBuf>,
        #[arg(long, requires = "truth_phase")]
        truth_magnitude: Option<PathBuf>,
        #[arg(long, requires = "truth_magnitude")]
        truth_phase: Option<PathBuf>,
    },
    /// Locate a template inside an image by normalised cross-correlation.
    Register { image: PathBuf, template: PathBuf },
    /// Print the polynomial scope table.
    ScopeTable {
        /// Recompute instead of printing the built-in table.
        #[arg(long)]
        compute: bool,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if cause.is::<Diverged>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<pftycho::Error>() {
            return match e {
                pftycho::Error::Numerical(_) | pftycho::Error::NonConvergence { .. } => 3,
                pftycho::Error::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            anyhow::bail!(Invalid("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Simulate { config, overrides } => commands::simulate(&config::ExperimentConfig::load(&config, &overrides)?),
        Command::Reconstruct { config, algorithm, overrides } => {
            commands::reconstruct(&config::ExperimentConfig::load(&config, &overrides)?, algorithm)
        }
        Command::PftBench { sizes, half_width, p, eps, trials, seed, out } => {
            commands::pft_bench(&sizes, half_width, p, &eps, trials, seed, out.as_deref())
        }
        Command::Metrics { recon, truth, truth_magnitude, truth_phase } => {
            commands::metrics(&recon, truth.as_deref(), truth_magnitude.as_deref().zip(truth_phase.as_deref()))
        }
        Command::Register { image, template } => commands::register(&image, &template),
        Command::ScopeTable { compute } => commands::scope_table(compute),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
