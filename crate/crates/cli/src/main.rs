//! `dsim` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Common, Settings};

#[derive(Debug, Parser)]
#[command(name = "dsim", version, about = "Discrete scale invariant Markov sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write it as CSV with a JSON sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the lag estimator, the table-based covariance and the closed form.
    VerifyCov {
        #[command(flatten)]
        common: Common,
        /// Read the path instead of simulating.
        #[arg(long)]
        from_path: Option<PathBuf>,
        /// Time index n of R_n(tau).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<i64>,
    },
    /// Variation-ratio (and optionally likelihood) Hurst estimates.
    EstimateHurst {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from_path: Option<PathBuf>,
        /// Add the maximum-likelihood estimate.
        #[arg(long)]
        mle: bool,
    },
    /// Spectral density matrix on a uniform frequency grid.
    Spectral {
        #[command(flatten)]
        common: Common,
        /// Estimate the seasonal table from this path.
        #[arg(long)]
        from_path: Option<PathBuf>,
        /// Seasonal table JSON `{H, alpha, T, r0, r1}`.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        omega_points: Option<usize>,
        /// Also write the embedding covariance matrices Q(0, tau), |tau| <= T.
        #[arg(long)]
        q_out: Option<PathBuf>,
    },
    /// MAE of the Hurst estimators over a sweep of true H.
    MaeBench {
        #[command(flatten)]
        common: Common,
        /// True Hurst indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        hursts: Option<Vec<f64>>,
        /// Skip the likelihood estimator.
        #[arg(long)]
        no_mle: bool,
        /// Long-format per-replicate file.
        #[arg(long)]
        plot_out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Lib(dsim::Error),
}

impl From<dsim::Error> for CliError {
    fn from(e: dsim::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(dsim::Error::Numerical(_)) => 4,
            CliError::Input(_) | CliError::Lib(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common } => commands::simulate(Settings::resolve(&common)?),
        Command::VerifyCov { common, from_path, n, tau } => {
            commands::verify_cov(Settings::resolve(&common)?, from_path, n, tau)
        }
        Command::EstimateHurst { common, from_path, mle } => {
            commands::estimate_hurst(Settings::resolve(&common)?, from_path, mle)
        }
        Command::Spectral { common, from_path, table, omega_points, q_out } => {
            commands::spectral(Settings::resolve(&common)?, from_path, table, omega_points, q_out)
        }
        Command::MaeBench { common, hursts, no_mle, plot_out } => {
            commands::bench(Settings::resolve(&common)?, hursts, no_mle, plot_out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
