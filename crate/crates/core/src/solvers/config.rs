use serde::Serialize;

use crate::error::{Error, Result};
use crate::merit::MeritKind;
use crate::projection::ProjectionTarget;

/// Step reduction after a failed sufficient-increase test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backtrack {
    Halving,
    /// Maximizer of the quadratic through `f(x)`, the slope `g.d` and the failed
    /// trial, clamped to `[0.1, 0.9]` times the current step.
    QuadraticInterpolation,
}

/// Scale of the shift term in SSPA's direction `y + r x` (or `y + r m x`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum ShiftScaling {
    /// `y + r x`: the SPP shifted gradient `g + r m x` divided by `m`, which is
    /// the scale of the residual `y` on `Bx^m = 1`.
    #[default]
    Residual,
    /// `y + r m x`.
    Order,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    /// Sufficient-increase constant of the line searches.
    pub rho: f64,
    /// Target lower bound on the smallest Hessian eigenvalue in SPP and SSPA.
    pub tau: f64,
    pub merit: MeritKind,
    pub beta_min: f64,
    pub beta_max: f64,
    /// `None` picks quadratic interpolation for SPG1 and halving for SPG2.
    pub backtrack: Option<Backtrack>,
    /// Clamp spectral steps to `[min(|g|, 1/|g|), max(|g|, 1/|g|)]` with the
    /// newest gradient instead of `[beta_min, beta_max]`.
    pub gradient_scaled_safeguards: bool,
    /// A stopping test ends the run only if the pair certifies at this
    /// tolerance. `None` stops on the tests alone.
    pub certify_tol: Option<f64>,
    pub projection: ProjectionTarget,
    pub shift_scaling: ShiftScaling,
    /// Step reductions allowed per line search before giving up.
    pub max_backtracks: usize,
    /// Keep every iterate in [`super::SolverReport::iterates`].
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 500,
            rho: 1e-4,
            tau: 0.05,
            merit: MeritKind::Rayleigh,
            beta_min: 1e-10,
            beta_max: 1e10,
            backtrack: None,
            gradient_scaled_safeguards: false,
            certify_tol: Some(1e-4),
            projection: ProjectionTarget::SpherePlus,
            shift_scaling: ShiftScaling::Residual,
            max_backtracks: 50,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max.is_finite()) {
            return bad(format!(
                "need 0 < beta_min <= beta_max < inf, got [{}, {}]",
                self.beta_min, self.beta_max
            ));
        }
        if let Some(t) = self.certify_tol {
            if !(t > 0.0) {
                return bad(format!("certify_tol must be positive, got {t}"));
            }
        }
        Ok(())
    }
}
