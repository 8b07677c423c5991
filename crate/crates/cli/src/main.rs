//! `ricci-rot`: classify, sample, mesh and validate rotational Ricci surfaces,
//! and solve the free-boundary family in the unit ball.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 inadmissible parameters,
//! 3 domain, numerical or I/O error, 64 bad usage.

mod commands;
mod config;
mod profile_io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ricci_rot::{Branch, RicciError};

use crate::config::JobConfig;

#[derive(Debug, Parser)]
#[command(name = "ricci-rot", version, about = "Rotational Ricci surfaces in Euclidean 3-space")]
pub struct Cli {
    /// TOML file supplying defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Integration constant.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// plus or minus.
    #[arg(long)]
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct WindowArgs {
    /// Lower end of the sampling window; defaults to the classified bound.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Upper end of the sampling window; defaults to the classified bound.
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Number of profile samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// Clip a window that exceeds the classified bound instead of refusing it.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the parameters and print the report as JSON.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sample the generating curve to CSV (or JSON with --json).
    Profile {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Output CSV; a `<out>.params.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the surface of revolution as an OBJ quad mesh.
    Mesh {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Points on each parallel.
        #[arg(long)]
        n_theta: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the free-boundary problem in the unit ball.
    Freeboundary {
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        /// Comma-separated list of b values in [0, 1].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sweep: Option<Vec<f64>>,
        /// Print the Gauss-Bonnet pair for each solution.
        #[arg(long)]
        audit: bool,
        /// Directory receiving one OBJ per solution.
        #[arg(long, value_name = "DIR")]
        mesh_out: Option<PathBuf>,
        /// Sweep table; CSV if the name ends in .csv, JSON otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Profile samples per mesh.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_theta: Option<usize>,
    },
    /// Validate a profile CSV, a parameter set, or a random sweep.
    Validate {
        /// Profile CSV with its `.params.json` sidecar.
        #[arg(long, conflicts_with = "random")]
        input: Option<PathBuf>,
        /// Number of random admissible parameter sets.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Uniform resamples for the finite-difference checks.
        #[arg(long)]
        resample: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Describe the region where the reduction ODE is well posed, or scan it.
    Omega {
        #[command(flatten)]
        params: ParamArgs,
        /// Grid points per axis; writes an `s,x,inside` CSV.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-5.0, 5.0])]
        s_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 5.0])]
        x_range: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed run: the process exit code and the message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_INADMISSIBLE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<RicciError> for Failure {
    fn from(e: RicciError) -> Self {
        match e {
            RicciError::Inadmissible { a, b, c, set } => Failure {
                code: EXIT_INADMISSIBLE,
                message: format!("inadmissible: (a,b,c) ∈ {set} for (a, b, c) = ({a}, {b}, {c})"),
            },
            other => Failure {
                code: EXIT_DOMAIN,
                message: other.to_string(),
            },
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<RicciError>() {
            Ok(r) => r.into(),
            Err(e) => Failure {
                code: EXIT_DOMAIN,
                message: format!("{e:#}"),
            },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("RICCI_ROT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("RICCI_ROT_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => JobConfig::load(p).map_err(|e| Failure::usage(format!("{e:#}")))?,
        None => JobConfig::default(),
    };
    commands::dispatch(&cli, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
