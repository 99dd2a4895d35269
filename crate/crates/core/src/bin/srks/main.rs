//! `srks`: command-line front end.
//!
//! Exit codes: 0 success (bound met), 1 bound violated or numerical
//! failure, 2 invalid input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "srks",
    version,
    about = "Strongly Rayleigh measures, mixed characteristic polynomials and thin trees"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Cap on enumerated supports, spanning trees and lifted products.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Distribution JSON: {"m": .., "support": [{"set": [..], "p": "a/b"}, ..]}.
    #[arg(long)]
    pub dist: PathBuf,
    /// Vectors file: header "d m", then one vector per line.
    #[arg(long)]
    pub vectors: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mixed polynomial three ways (enumeration, operator, closed form), compared exactly.
    VerifyIdentity {
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Random strongly Rayleigh instances with isotropic frames.
        #[arg(long, conflicts_with_all = ["dist", "vectors"])]
        random: bool,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Interlacing descent with its trace; exit 0 iff the bound holds.
    Descend(Inputs),
    /// Descent on an isotropic system with both bounds checked.
    Certificate(Inputs),
    /// Fit maximum-entropy weights for target marginals.
    Maxent {
        vectors: PathBuf,
        /// Comma-separated target marginals.
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<f64>,
        #[arg(long, default_value_t = srks::maxent::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Thin spanning tree through the maximum-entropy pipeline.
    Thintree {
        graph: PathBuf,
        /// Comma-separated edge indices forming F (default: all edges).
        #[arg(long, value_delimiter = ',')]
        f: Option<Vec<usize>>,
        /// Whitespace-separated PD matrix D, one row per line.
        #[arg(long)]
        d: Option<PathBuf>,
        /// Interior-point mixing weight.
        #[arg(long, default_value_t = 0.01)]
        eps_target: f64,
    },
    /// Effective resistance of every edge.
    Resistance { graph: PathBuf },
    /// Partition an isotropic system into r parts of small norm.
    Ksr {
        vectors: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Seeded samples from a distribution.
    Sample {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Err(e) = output::emit(&outcome.report, &cli.global) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if let Some(msg) = &outcome.failure {
                eprintln!("{msg}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
