//! Experiment configuration and drivers, independent of any output format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use teicp_core::tensor::io::read_tensor;
use teicp_core::{
    build, random_start, solve, BKind, DenseSymmetricTensor, Operator, ProblemSpec, SolverConfig,
    SolverKind, SolverReport, Status,
};

use crate::CliError;

/// Width of the eigenvalue histogram bins.
pub const BIN_WIDTH: f64 = 1e-3;

/// A built-in problem or a tensor file paired with one of the identity operators.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin(ProblemSpec),
    File { path: PathBuf, b: BKind },
}

impl FromStr for ProblemSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let Some(params) = s.strip_prefix("file:") else {
            return s
                .parse()
                .map(ProblemSource::Builtin)
                .map_err(|e| e.to_string());
        };
        let mut path = None;
        let mut b = BKind::Z;
        for kv in params.split(',') {
            match kv.split_once('=') {
                Some(("path", v)) if !v.is_empty() => path = Some(PathBuf::from(v)),
                Some(("b", "z" | "Z")) => b = BKind::Z,
                Some(("b", "h" | "H")) => b = BKind::H,
                _ => {
                    return Err(format!(
                        "invalid file problem parameter '{kv}' (expected path=FILE or b=z|h)"
                    ))
                }
            }
        }
        let path = path.ok_or("file problem needs path=FILE")?;
        Ok(ProblemSource::File { path, b })
    }
}

impl fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSource::Builtin(spec) => write!(f, "{spec}"),
            ProblemSource::File { path, b } => {
                let b = if *b == BKind::Z { "z" } else { "h" };
                write!(f, "file:path={},b={b}", path.display())
            }
        }
    }
}

/// Tensor pair ready to solve.
#[derive(Debug)]
pub struct LoadedProblem {
    pub label: String,
    pub a: DenseSymmetricTensor,
    pub b: Operator,
    pub default_start: DVector<f64>,
}

impl LoadedProblem {
    pub fn load(source: &ProblemSource) -> Result<Self, CliError> {
        match source {
            ProblemSource::Builtin(spec) => {
                let p = build(spec)?;
                Ok(LoadedProblem {
                    label: spec.to_string(),
                    a: p.a,
                    b: p.b,
                    default_start: spec.default_start(),
                })
            }
            ProblemSource::File { path, b } => {
                let a = read_tensor(path)?;
                let b = b.operator(a.order(), a.dim())?;
                let default_start = DVector::from_element(a.dim(), 1.0);
                Ok(LoadedProblem {
                    label: source.to_string(),
                    a,
                    b,
                    default_start,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn solve(
        &self,
        kind: SolverKind,
        x0: &DVector<f64>,
        cfg: &SolverConfig,
    ) -> Result<SolverReport, CliError> {
        Ok(solve(kind, &self.a, &self.b, x0, cfg)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Multistart,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub solvers: Vec<SolverKind>,
    pub runs: usize,
    pub seed: u64,
    pub x0: Option<DVector<f64>>,
    pub solver: SolverConfig,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSource) -> Self {
        ExperimentConfig {
            problem,
            solvers: SolverKind::ALL.to_vec(),
            runs: 100,
            seed: 0,
            x0: None,
            solver: SolverConfig::default(),
            timing: false,
        }
    }

    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if self.solvers.is_empty() {
            return Err(CliError::Usage("no solver selected".into()));
        }
        if self.runs == 0 {
            return Err(CliError::Usage("--runs must be at least 1".into()));
        }
        if self.x0.is_some() && self.runs > 1 {
            return Err(CliError::Usage(
                "--x0 and --runs > 1 are mutually exclusive".into(),
            ));
        }
        match mode {
            Mode::Single if self.runs > 1 => Err(CliError::Usage(
                "a single-start command takes no --runs > 1".into(),
            )),
            Mode::Multistart if self.runs < 2 => {
                Err(CliError::Usage("multistart needs --runs >= 2".into()))
            }
            _ => self
                .solver
                .validate()
                .map_err(|e| CliError::Usage(e.to_string())),
        }
    }
}

/// Runs every requested solver from one start: `x0` if given, else the
/// problem's documented start.
pub fn run_single(cfg: &ExperimentConfig) -> Result<(LoadedProblem, Vec<SolverReport>), CliError> {
    cfg.validate(Mode::Single)?;
    let problem = LoadedProblem::load(&cfg.problem)?;
    let x0 = cfg
        .x0
        .clone()
        .unwrap_or_else(|| problem.default_start.clone());
    if x0.len() != problem.dim() {
        return Err(CliError::Usage(format!(
            "--x0 has {} entries, problem dimension is {}",
            x0.len(),
            problem.dim()
        )));
    }
    let reports = cfg
        .solvers
        .iter()
        .map(|&kind| problem.solve(kind, &x0, &cfg.solver))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((problem, reports))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub run: usize,
    pub solver: SolverKind,
    pub lambda: f64,
    pub iters: usize,
    pub status: Status,
    pub time: f64,
    /// Final iterate on the unit sphere.
    #[serde(skip)]
    pub x: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    /// Bin center.
    pub lambda: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub runs: usize,
    pub converged: usize,
    pub median_iters: f64,
    pub mean_time: f64,
    /// Eigenvalues reached by converged runs, most populated bin first.
    pub histogram: Vec<Bin>,
}

impl SolverSummary {
    /// Centers of the `k` most populated bins.
    pub fn modes(&self, k: usize) -> Vec<f64> {
        self.histogram.iter().take(k).map(|b| b.lambda).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistartResult {
    pub problem: String,
    pub seed: u64,
    pub summaries: Vec<SolverSummary>,
    pub rows: Vec<RunRow>,
}

/// Start `r` is `random_start(n, seed + r)`; every solver sees the same starts.
/// Runs execute in parallel and are collected in run order.
pub fn run_multistart(cfg: &ExperimentConfig) -> Result<MultistartResult, CliError> {
    cfg.validate(Mode::Multistart)?;
    let problem = LoadedProblem::load(&cfg.problem)?;
    let n = problem.dim();
    let per_run = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let x0 = random_start(n, cfg.seed.wrapping_add(r as u64));
            cfg.solvers
                .iter()
                .map(|&kind| {
                    problem
                        .solve(kind, &x0, &cfg.solver)
                        .map_err(|e| CliError::Run(format!("run {r}, {}: {e}", kind.label())))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<RunRow> = per_run
        .iter()
        .enumerate()
        .flat_map(|(r, reports)| {
            reports.iter().map(move |rep| RunRow {
                run: r,
                solver: rep.solver,
                lambda: rep.pair.lambda,
                iters: rep.iters,
                status: rep.status,
                time: rep.wall_time,
                x: rep.pair.x.clone(),
            })
        })
        .collect();
    let summaries = cfg
        .solvers
        .iter()
        .map(|&kind| summarize(kind, rows.iter().filter(|r| r.solver == kind)))
        .collect();
    Ok(MultistartResult {
        problem: problem.label,
        seed: cfg.seed,
        summaries,
        rows,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Bins converged eigenvalues at [`BIN_WIDTH`]; ties in count go to the larger eigenvalue.
pub fn histogram(lambdas: impl IntoIterator<Item = f64>) -> Vec<Bin> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for l in lambdas.into_iter().filter(|l| l.is_finite()) {
        *counts.entry((l / BIN_WIDTH).round() as i64).or_default() += 1;
    }
    let mut bins: Vec<(i64, usize)> = counts.into_iter().collect();
    bins.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
    bins.into_iter()
        .map(|(key, count)| Bin {
            lambda: key as f64 * BIN_WIDTH,
            count,
        })
        .collect()
}

fn summarize<'a>(solver: SolverKind, rows: impl Iterator<Item = &'a RunRow>) -> SolverSummary {
    let rows: Vec<&RunRow> = rows.collect();
    let mut iters: Vec<f64> = rows.iter().map(|r| r.iters as f64).collect();
    let mean_time = rows.iter().map(|r| r.time).sum::<f64>() / rows.len().max(1) as f64;
    SolverSummary {
        solver,
        runs: rows.len(),
        converged: rows
            .iter()
            .filter(|r| r.status == Status::Converged)
            .count(),
        median_iters: median(&mut iters),
        mean_time,
        histogram: histogram(
            rows.iter()
                .filter(|r| r.status == Status::Converged)
                .map(|r| r.lambda),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_sources() {
        assert_eq!(
            "ex2:n=4".parse::<ProblemSource>().unwrap(),
            ProblemSource::Builtin(ProblemSpec::Ex2 { n: 4 })
        );
        assert_eq!(
            "file:path=a.json,b=h".parse::<ProblemSource>().unwrap(),
            ProblemSource::File {
                path: "a.json".into(),
                b: BKind::H
            }
        );
        assert!("file:b=h".parse::<ProblemSource>().is_err());
        assert!("file:path=a.json,b=q".parse::<ProblemSource>().is_err());
        assert!("ex9".parse::<ProblemSource>().is_err());
    }

    #[test]
    fn median_midpoint() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn histogram_bins_and_order() {
        let h = histogram([0.36331, 0.36329, 0.8, 0.80004, 0.79996, f64::NAN, 0.1]);
        assert_eq!(h.len(), 3);
        assert_eq!(h[0].count, 3);
        assert!((h[0].lambda - 0.8).abs() < 1e-12);
        assert!((h[1].lambda - 0.363).abs() < 1e-12);
        assert_eq!(h[2].count, 1);
    }

    #[test]
    fn config_invariants() {
        let mut cfg = ExperimentConfig::new(ProblemSource::Builtin(ProblemSpec::Ex1));
        assert!(cfg.validate(Mode::Multistart).is_ok());
        assert!(matches!(
            cfg.validate(Mode::Single),
            Err(CliError::Usage(_))
        ));
        cfg.x0 = Some(DVector::from_element(3, 1.0));
        assert!(matches!(
            cfg.validate(Mode::Multistart),
            Err(CliError::Usage(_))
        ));
        cfg.runs = 1;
        assert!(cfg.validate(Mode::Single).is_ok());
        cfg.runs = 0;
        assert!(cfg.validate(Mode::Single).is_err());
    }

    #[test]
    fn multistart_is_ordered_and_complete() {
        let mut cfg = ExperimentConfig::new(ProblemSource::Builtin(ProblemSpec::Ex2 { n: 3 }));
        cfg.runs = 4;
        cfg.solvers = vec![SolverKind::Spg1, SolverKind::Spp];
        let res = run_multistart(&cfg).unwrap();
        assert_eq!(res.rows.len(), 8);
        let order: Vec<(usize, SolverKind)> = res.rows.iter().map(|r| (r.run, r.solver)).collect();
        assert_eq!(
            order[..3],
            [
                (0, SolverKind::Spg1),
                (0, SolverKind::Spp),
                (1, SolverKind::Spg1)
            ]
        );
        assert_eq!(res.summaries.len(), 2);
        assert_eq!(res.summaries[0].runs, 4);
    }
}
