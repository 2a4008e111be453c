//! Tables, CSV and JSON writers.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;
use teicp_core::{SolverKind, SolverReport, Status};

use crate::experiment::MultistartResult;
use crate::CliError;

/// One line per solver: algorithm, eigenvalue, eigenvector, iterations,
/// largest residual component, wall time and status.
pub fn solve_table(
    w: &mut dyn Write,
    problem: &str,
    reports: &[SolverReport],
) -> std::io::Result<()> {
    writeln!(w, "problem {problem}")?;
    writeln!(
        w,
        "{:<5} {:>12} {:<40} {:>5} {:>10} {:>10}  status",
        "alg", "lambda", "eigenvector", "its", "residual", "time(s)"
    )?;
    for r in reports {
        let x: Vec<String> = r.pair.x.iter().map(|v| format!("{v:.4}")).collect();
        writeln!(
            w,
            "{:<5} {:>12.6} {:<40} {:>5} {:>10.2e} {:>10.4}  {}",
            r.solver.label(),
            r.pair.lambda,
            format!("[{}]", x.join(", ")),
            r.iters,
            r.residual.max(),
            r.wall_time,
            r.status
        )?;
        if let Some(msg) = &r.message {
            writeln!(w, "      note: {msg}")?;
        }
    }
    Ok(())
}

pub fn multistart_table(w: &mut dyn Write, res: &MultistartResult) -> std::io::Result<()> {
    writeln!(w, "problem {}  seed {}", res.problem, res.seed)?;
    writeln!(
        w,
        "{:<5} {:>5} {:>9} {:>12} {:>12}  top eigenvalues (count)",
        "alg", "runs", "converged", "median its", "mean time"
    )?;
    for s in &res.summaries {
        let modes: Vec<String> = s
            .histogram
            .iter()
            .take(3)
            .map(|b| format!("{:.3} ({})", b.lambda, b.count))
            .collect();
        writeln!(
            w,
            "{:<5} {:>5} {:>9} {:>12.2} {:>12.6}  {}",
            s.solver.label(),
            s.runs,
            s.converged,
            s.median_iters,
            s.mean_time,
            modes.join(", ")
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    k: usize,
    solver: SolverKind,
    lambda: f64,
    merit: f64,
    grad_norm: f64,
    step: f64,
    beta: f64,
    shift: f64,
}

pub fn trace_csv(w: &mut dyn Write, reports: &[SolverReport]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        for t in &r.trace {
            out.serialize(TraceRow {
                k: t.k,
                solver: r.solver,
                lambda: t.lambda,
                merit: t.merit_value,
                grad_norm: t.grad_norm,
                step: t.step,
                beta: t.beta,
                shift: t.shift,
            })?;
        }
    }
    if reports.iter().all(|r| r.trace.is_empty()) {
        out.write_record([
            "k",
            "solver",
            "lambda",
            "merit",
            "grad_norm",
            "step",
            "beta",
            "shift",
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RunCsvRow {
    run: usize,
    solver: SolverKind,
    lambda: f64,
    iters: usize,
    status: Status,
    time: Option<f64>,
}

pub fn runs_csv(w: &mut dyn Write, res: &MultistartResult, timing: bool) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for r in &res.rows {
        out.serialize(RunCsvRow {
            run: r.run,
            solver: r.solver,
            lambda: r.lambda,
            iters: r.iters,
            status: r.status,
            time: timing.then_some(r.time),
        })?;
    }
    if res.rows.is_empty() {
        out.write_record(["run", "solver", "lambda", "iters", "status", "time"])?;
    }
    out.flush()?;
    Ok(())
}

/// Replaces every `key` field in the tree by null.
fn null_field(v: &mut Value, key: &str) {
    match v {
        Value::Object(map) => {
            if let Some(f) = map.get_mut(key) {
                *f = Value::Null;
            }
            map.values_mut().for_each(|c| null_field(c, key));
        }
        Value::Array(items) => items.iter_mut().for_each(|c| null_field(c, key)),
        _ => {}
    }
}

fn write_json(
    w: &mut dyn Write,
    mut v: Value,
    time_keys: &[&str],
    timing: bool,
) -> Result<(), CliError> {
    if !timing {
        time_keys.iter().for_each(|k| null_field(&mut v, k));
    }
    serde_json::to_writer_pretty(&mut *w, &v)?;
    writeln!(w)?;
    Ok(())
}

pub fn reports_json(
    w: &mut dyn Write,
    reports: &[SolverReport],
    timing: bool,
) -> Result<(), CliError> {
    write_json(w, serde_json::to_value(reports)?, &["wall_time"], timing)
}

pub fn multistart_json(
    w: &mut dyn Write,
    res: &MultistartResult,
    timing: bool,
) -> Result<(), CliError> {
    write_json(
        w,
        serde_json::to_value(res)?,
        &["time", "mean_time"],
        timing,
    )
}
