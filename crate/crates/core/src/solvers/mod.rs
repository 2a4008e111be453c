//! Spectral projected gradient (SPG1, SPG2), shifted projected power (SPP),
//! scaling-and-projection (SPA) and its shifted variant (SSPA).
//!
//! Every solver maximizes the Rayleigh quotient over `x >= 0` and returns a
//! [`SolverReport`] with a per-iteration trace. Setup problems (shape
//! mismatches, odd order, invalid configuration, an undefined merit at the
//! start) are returned as errors; failures during iteration end the run with a
//! non-converged [`Status`].
//!
//! Each run stops when its own test fires or when any of `|x_{k+1} - x_k|`,
//! `|lambda_{k+1} - lambda_k|` or `|g_{k+1}|` drops to `tol`. With
//! [`SolverConfig::certify_tol`] set, a stopping test only ends the run if the
//! current pair also passes [`is_pareto_eigenpair`] at that tolerance.

mod config;
mod linalg;
mod scaling;
mod spg;
mod spp;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::projection::project_sphere_plus;
use crate::tensor::TensorOperator;
use crate::verify::{is_pareto_eigenpair, unit_residual, ResidualTriple};

pub use config::{Backtrack, ShiftScaling, SolverConfig};
pub use linalg::min_eig_sym;
pub use scaling::{spa, sspa};
pub use spg::{spg1, spg2};
pub use spp::spp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Spg1,
    Spg2,
    Spp,
    Spa,
    Sspa,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Spg1,
        SolverKind::Spg2,
        SolverKind::Spp,
        SolverKind::Spa,
        SolverKind::Sspa,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Spg1 => "SPG1",
            SolverKind::Spg2 => "SPG2",
            SolverKind::Spp => "SPP",
            SolverKind::Spa => "SPA",
            SolverKind::Sspa => "SSPA",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label().to_ascii_lowercase())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown solver '{s}' (expected spg1, spg2, spp, spa or sspa)"))
    }
}

/// Runs `kind` from `x0`.
pub fn solve(
    kind: SolverKind,
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    match kind {
        SolverKind::Spg1 => spg1(a, b, x0, cfg),
        SolverKind::Spg2 => spg2(a, b, x0, cfg),
        SolverKind::Spp => spp(a, b, x0, cfg),
        SolverKind::Spa => spa(a, b, x0, cfg),
        SolverKind::Sspa => sspa(a, b, x0, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Converged,
    MaxIters,
    LineSearchFailure,
    DomainError,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "Converged",
            Status::MaxIters => "MaxIters",
            Status::LineSearchFailure => "LineSearchFailure",
            Status::DomainError => "DomainError",
        })
    }
}

fn ser_dvec<S: Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

/// `(lambda, x)` with `x` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    #[serde(serialize_with = "ser_dvec")]
    pub x: DVector<f64>,
}

/// State at iterate `k`.
///
/// `step` is the step length that produced the iterate (0 at the start; the
/// projected power step of SPP counts as 1). `beta` is the spectral step for
/// the next iteration of SPG1 and SPG2, 0 elsewhere. `shift` is the shift
/// used to produce the iterate, 0 when unused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub lambda: f64,
    pub merit_value: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub beta: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub pair: EigenPair,
    pub status: Status,
    pub iters: usize,
    pub residual: ResidualTriple,
    pub trace: Vec<IterationRecord>,
    /// Seconds.
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Raw iterates in each solver's own normalization, kept only when
    /// [`SolverConfig::record_iterates`] is set.
    #[serde(skip)]
    pub iterates: Vec<DVector<f64>>,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Spectral step `<s,s>/<s,y>` clamped to the configured safeguards, or
/// `beta_max` when `<s,y> <= 0`.
pub fn bb_step(s: &DVector<f64>, y: &DVector<f64>, cfg: &SolverConfig) -> f64 {
    bb_clamped(s, y, cfg.beta_min, cfg.beta_max)
}

fn bb_clamped(s: &DVector<f64>, y: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    let sy = s.dot(y);
    if sy <= 0.0 {
        return hi;
    }
    (s.norm_squared() / sy).clamp(lo, hi)
}

/// Projected direction `d = P(x + beta g) - x` with both sides of the ascent
/// inequality `g.d >= |d|^2 / beta`.
pub fn ascent_direction_check(
    x: &DVector<f64>,
    beta: f64,
    g: &DVector<f64>,
) -> (DVector<f64>, f64, f64) {
    let d = project_sphere_plus(&(x + g * beta)) - x;
    let lhs = g.dot(&d);
    let rhs = d.norm_squared() / beta;
    (d, lhs, rhs)
}

/// Shape checks shared by all solvers.
fn check_inputs(a: &dyn TensorOperator, b: &dyn TensorOperator, x0: &DVector<f64>) -> Result<()> {
    let m = a.order();
    if b.order() != m {
        return Err(Error::InvalidShape(format!(
            "A has order {m}, B has order {}",
            b.order()
        )));
    }
    if !m.is_multiple_of(2) {
        return Err(Error::OddOrder(m));
    }
    if b.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if x0.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: x0.len(),
        });
    }
    if x0.iter().all(|&v| v == 0.0) || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Bookkeeping shared by every solver loop.
struct Run<'a> {
    kind: SolverKind,
    a: &'a dyn TensorOperator,
    b: &'a dyn TensorOperator,
    cfg: &'a SolverConfig,
    start: Instant,
    trace: Vec<IterationRecord>,
    iterates: Vec<DVector<f64>>,
}

impl<'a> Run<'a> {
    fn new(
        kind: SolverKind,
        a: &'a dyn TensorOperator,
        b: &'a dyn TensorOperator,
        cfg: &'a SolverConfig,
    ) -> Self {
        Self {
            kind,
            a,
            b,
            cfg,
            start: Instant::now(),
            trace: Vec::with_capacity(cfg.max_iters.min(1024) + 1),
            iterates: Vec::new(),
        }
    }

    fn record(&mut self, rec: IterationRecord, x: &DVector<f64>) {
        self.trace.push(rec);
        if self.cfg.record_iterates {
            self.iterates.push(x.clone());
        }
    }

    /// True when a stopping test may end the run at `(lambda, x)`.
    fn certified(&self, lambda: f64, x: &DVector<f64>) -> bool {
        match self.cfg.certify_tol {
            None => true,
            Some(tol) => is_pareto_eigenpair(self.a, self.b, lambda, x, tol),
        }
    }

    /// Section-wide stopping quantities, ORed together.
    fn generic_stop(&self, dx: f64, dlambda: f64, grad_norm: f64) -> bool {
        let tol = self.cfg.tol;
        dx <= tol || dlambda <= tol || grad_norm <= tol
    }

    fn finish(
        self,
        status: Status,
        iters: usize,
        x: &DVector<f64>,
        message: Option<String>,
    ) -> SolverReport {
        let unit = x / x.norm();
        let lambda = self.trace.last().map_or(f64::NAN, |r| r.lambda);
        let residual = unit_residual(self.a, self.b, lambda, &unit).unwrap_or(ResidualTriple {
            primal: f64::NAN,
            dual: f64::NAN,
            comp: f64::NAN,
        });
        debug_assert_eq!(self.trace.len(), iters + 1);
        SolverReport {
            solver: self.kind,
            pair: EigenPair { lambda, x: unit },
            status,
            iters,
            residual,
            trace: self.trace,
            wall_time: self.start.elapsed().as_secs_f64(),
            message,
            iterates: self.iterates,
        }
    }
}
