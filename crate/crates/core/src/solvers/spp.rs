//! Shifted projected power method (SPP).

use nalgebra::DVector;

use super::{
    check_inputs, min_eig_sym, IterationRecord, Run, SolverConfig, SolverKind, SolverReport, Status,
};
use crate::error::Result;
use crate::merit::{evaluate, rayleigh_hessian, MeritEval, MeritKind};
use crate::projection::{project_orthant, project_sphere_plus};
use crate::tensor::TensorOperator;

/// `max(0, (tau - lambda_min(H)) / m)`.
pub(super) fn shift(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
    tau: f64,
) -> Result<f64> {
    let h = rayleigh_hessian(a, b, x)?;
    let lmin = min_eig_sym(&h)?;
    Ok(((tau - lmin) / a.order() as f64).max(0.0))
}

fn record(k: usize, ev: &MeritEval, step: f64, shift: f64) -> IterationRecord {
    IterationRecord {
        k,
        lambda: ev.lambda,
        merit_value: ev.lambda,
        grad_norm: ev.gradient.norm(),
        step,
        beta: 0.0,
        shift,
    }
}

/// SPP on the Rayleigh quotient: `x+ = [g + r m x]_+ / |[g + r m x]_+|`.
pub fn spp(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_inputs(a, b, x0)?;
    let m = a.order() as f64;
    let mut run = Run::new(SolverKind::Spp, a, b, cfg);

    let mut x = project_sphere_plus(x0);
    let mut ev = evaluate(MeritKind::Rayleigh, a, b, &x)?;
    run.record(record(0, &ev, 0.0, 0.0), &x);

    for k in 0..cfg.max_iters {
        let r = match shift(a, b, &x, cfg.tau) {
            Ok(r) => r,
            Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
        };
        let g_hat = project_orthant(&(&ev.gradient + &x * (r * m)));
        let norm = g_hat.norm();
        if norm <= cfg.tol && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k, &x, None));
        }
        if norm == 0.0 {
            let msg = "shifted gradient vanished after clipping".to_string();
            return Ok(run.finish(Status::DomainError, k, &x, Some(msg)));
        }

        let x_new = g_hat / norm;
        let ev_new = match evaluate(MeritKind::Rayleigh, a, b, &x_new) {
            Ok(e) => e,
            Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
        };
        let stop = run.generic_stop(
            (&x_new - &x).norm(),
            (ev_new.lambda - ev.lambda).abs(),
            ev_new.gradient.norm(),
        );
        run.record(record(k + 1, &ev_new, 1.0, r), &x_new);
        x = x_new;
        ev = ev_new;
        if stop && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k + 1, &x, None));
        }
    }
    Ok(run.finish(Status::MaxIters, cfg.max_iters, &x, None))
}
