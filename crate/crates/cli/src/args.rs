use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use teicp_core::{MeritKind, SolverKind};

use crate::experiment::ProblemSource;

#[derive(Debug, Parser)]
#[command(
    name = "teicp",
    version,
    about = "Pareto eigenpairs of symmetric tensor pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run each solver once from a single start and print a summary table.
    Solve(CommonArgs),
    /// Run each solver from the same set of seeded random starts.
    Multistart(CommonArgs),
    /// Write per-iteration traces from a single start.
    Trace(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// ex1 | ex2:n=5 | ex3 | ex4:n=5 | ex5:n=5 | ex6:n=5 | rand:n=4,m=4,seed=7 |
    /// file:path=A.json,b=z
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemSource,

    /// Solver to run; repeat for several. Defaults to all five.
    #[arg(long = "solver", value_parser = parse_solver)]
    pub solvers: Vec<SolverKind>,

    /// Starting vector as a comma list.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x0: Option<DVector<f64>>,

    /// Number of random starts (multistart only; default 100).
    #[arg(long)]
    pub runs: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long)]
    pub max_iters: Option<usize>,

    #[arg(long)]
    pub rho: Option<f64>,

    #[arg(long)]
    pub tau: Option<f64>,

    #[arg(long, value_parser = parse_merit)]
    pub merit: Option<MeritKind>,

    /// Output file. Trace and multistart output go to stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Clamp spectral steps to [min(|g|, 1/|g|), max(|g|, 1/|g|)].
    #[arg(long)]
    pub paper_literal_safeguards: bool,

    /// Record wall times in output files. Off by default so that files are
    /// reproducible byte for byte.
    #[arg(long)]
    pub timing: bool,
}

fn parse_problem(s: &str) -> Result<ProblemSource, String> {
    s.parse()
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse()
}

fn parse_merit(s: &str) -> Result<MeritKind, String> {
    s.parse()
}

pub fn parse_vector(s: &str) -> Result<DVector<f64>, String> {
    let vals = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number '{}'", t.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("entries must be finite".into());
    }
    Ok(DVector::from_vec(vals))
}
