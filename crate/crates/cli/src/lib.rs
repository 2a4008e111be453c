//! Command-line driver: single solves, seeded multistart experiments and
//! trace export.
//!
//! Exit codes: 0 when every run converged, 2 when a run hit the iteration
//! limit, 1 on errors and failed runs, 64 on usage errors.

pub mod args;
pub mod experiment;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use teicp_core::{SolverReport, Status};

pub use args::{Cli, Command, CommonArgs, Format};
pub use experiment::{
    histogram, median, run_multistart, run_single, Bin, ExperimentConfig, LoadedProblem, Mode,
    MultistartResult, ProblemSource, RunRow, SolverSummary, BIN_WIDTH,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
    #[error(transparent)]
    Core(#[from] teicp_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Where data goes: a file in the given format, or stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl OutputSpec {
    /// Explicit format wins, then the file extension, then `fallback`.
    pub fn resolve(path: Option<PathBuf>, format: Option<Format>, fallback: Format) -> Self {
        let from_ext = path.as_deref().and_then(Path::extension).and_then(|e| {
            match e.to_str()?.to_ascii_lowercase().as_str() {
                "csv" => Some(Format::Csv),
                "json" => Some(Format::Json),
                _ => None,
            }
        });
        OutputSpec {
            format: format.or(from_ext).unwrap_or(fallback),
            path,
        }
    }
}

/// Exit code for a finished batch: failures beat iteration limits.
pub fn exit_code<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> i32 {
    let mut code = EXIT_OK;
    for s in statuses {
        match s {
            Status::Converged => {}
            Status::MaxIters => code = code.max(EXIT_MAX_ITERS),
            Status::LineSearchFailure | Status::DomainError => return EXIT_FAILURE,
        }
    }
    code
}

pub fn experiment_config(args: &CommonArgs, mode: Mode) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(args.problem.clone());
    if !args.solvers.is_empty() {
        cfg.solvers = args.solvers.clone();
    }
    cfg.runs = args.runs.unwrap_or(match mode {
        Mode::Single => 1,
        Mode::Multistart => 100,
    });
    cfg.seed = args.seed;
    cfg.x0 = args.x0.clone();
    cfg.timing = args.timing;
    let s = &mut cfg.solver;
    s.tol = args.tol.unwrap_or(s.tol);
    s.max_iters = args.max_iters.unwrap_or(s.max_iters);
    s.rho = args.rho.unwrap_or(s.rho);
    s.tau = args.tau.unwrap_or(s.tau);
    s.merit = args.merit.unwrap_or(s.merit);
    s.gradient_scaled_safeguards = args.paper_literal_safeguards;
    cfg
}

/// Opens the data sink. Without a path data goes to `stdout` and the
/// human-readable summary to `stderr`.
fn with_sink<T>(
    out: &OutputSpec,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write, &mut dyn Write) -> Result<T, CliError>,
) -> Result<T, CliError> {
    match &out.path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let v = f(&mut file, stdout)?;
            file.flush()?;
            Ok(v)
        }
        None => f(stdout, stderr),
    }
}

pub fn cmd_solve(
    cfg: &ExperimentConfig,
    out: &OutputSpec,
    stdout: &mut dyn Write,
) -> Result<Vec<SolverReport>, CliError> {
    let (problem, reports) = run_single(cfg)?;
    output::solve_table(stdout, &problem.label, &reports)?;
    if let Some(path) = &out.path {
        let mut file = BufWriter::new(File::create(path)?);
        match out.format {
            Format::Json => output::reports_json(&mut file, &reports, cfg.timing)?,
            Format::Csv => output::trace_csv(&mut file, &reports)?,
        }
        file.flush()?;
    }
    Ok(reports)
}

pub fn cmd_multistart(
    cfg: &ExperimentConfig,
    out: &OutputSpec,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<MultistartResult, CliError> {
    let res = run_multistart(cfg)?;
    with_sink(out, stdout, stderr, |data, summary| {
        match out.format {
            Format::Csv => output::runs_csv(data, &res, cfg.timing)?,
            Format::Json => output::multistart_json(data, &res, cfg.timing)?,
        }
        output::multistart_table(summary, &res)?;
        Ok(())
    })?;
    Ok(res)
}

pub fn cmd_trace(
    cfg: &ExperimentConfig,
    out: &OutputSpec,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Vec<SolverReport>, CliError> {
    let (problem, reports) = run_single(cfg)?;
    with_sink(out, stdout, stderr, |data, summary| {
        match out.format {
            Format::Csv => output::trace_csv(data, &reports)?,
            Format::Json => output::reports_json(data, &reports, cfg.timing)?,
        }
        output::solve_table(summary, &problem.label, &reports)?;
        Ok(())
    })?;
    Ok(reports)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => {
            let cfg = experiment_config(a, Mode::Single);
            let out = OutputSpec::resolve(a.out.clone(), a.format, Format::Json);
            cmd_solve(&cfg, &out, stdout).map(|r| statuses(&r))
        }
        Command::Multistart(a) => {
            let cfg = experiment_config(a, Mode::Multistart);
            let out = OutputSpec::resolve(a.out.clone(), a.format, Format::Csv);
            cmd_multistart(&cfg, &out, stdout, stderr)
                .map(|r| r.rows.iter().map(|r| r.status).collect())
        }
        Command::Trace(a) => {
            let cfg = experiment_config(a, Mode::Single);
            let out = OutputSpec::resolve(a.out.clone(), a.format, Format::Csv);
            cmd_trace(&cfg, &out, stdout, stderr).map(|r| statuses(&r))
        }
    };
    match result {
        Ok(st) => {
            let code = exit_code(&st);
            if code == EXIT_FAILURE {
                let _ = writeln!(stderr, "error: at least one solver failed");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn statuses(reports: &[SolverReport]) -> Vec<Status> {
    reports.iter().map(|r| r.status).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_precedence() {
        use Status::*;
        assert_eq!(exit_code(&[Converged, Converged]), EXIT_OK);
        assert_eq!(exit_code(&[Converged, MaxIters]), EXIT_MAX_ITERS);
        assert_eq!(exit_code(&[MaxIters, DomainError]), EXIT_FAILURE);
        assert_eq!(exit_code(&[LineSearchFailure]), EXIT_FAILURE);
        assert_eq!(exit_code(&[]), EXIT_OK);
    }

    #[test]
    fn output_format_resolution() {
        let csv = OutputSpec::resolve(Some("t.CSV".into()), None, Format::Json);
        assert_eq!(csv.format, Format::Csv);
        let explicit = OutputSpec::resolve(Some("t.csv".into()), Some(Format::Json), Format::Csv);
        assert_eq!(explicit.format, Format::Json);
        assert_eq!(
            OutputSpec::resolve(Some("t.out".into()), None, Format::Csv).format,
            Format::Csv
        );
        assert_eq!(
            OutputSpec::resolve(None, None, Format::Json).format,
            Format::Json
        );
    }
}
