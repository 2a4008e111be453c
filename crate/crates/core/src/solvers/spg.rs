//! Spectral projected gradient with a linear line search (SPG1) and with a
//! curvilinear search along the projection arc (SPG2).

use nalgebra::DVector;

use super::{
    bb_clamped, check_inputs, Backtrack, IterationRecord, Run, SolverConfig, SolverKind,
    SolverReport, Status,
};
use crate::error::Result;
use crate::merit::{evaluate, merit_value, MeritEval};
use crate::projection::project_sphere_plus;
use crate::tensor::TensorOperator;

/// Next trial step after the sufficient-increase test failed at `alpha`.
///
/// For ascent a failed test means `f(alpha) - f0 - alpha * slope < 0`, which is
/// exactly when the interpolating quadratic is concave and has a maximizer.
fn reduce(mode: Backtrack, alpha: f64, f_trial: f64, f0: f64, slope: f64) -> f64 {
    match mode {
        Backtrack::Halving => 0.5 * alpha,
        Backtrack::QuadraticInterpolation => {
            let den = 2.0 * (f_trial - f0 - alpha * slope);
            if den < 0.0 {
                (-alpha * alpha * slope / den).clamp(0.1 * alpha, 0.9 * alpha)
            } else {
                0.5 * alpha
            }
        }
    }
}

/// Spectral step for the next iteration.
///
/// `y` is the change of the gradient of `-f`, the objective actually being
/// minimized, so that `<s,y> > 0` along an ascent path with negative curvature.
fn next_beta(
    s: &DVector<f64>,
    g_old: &DVector<f64>,
    g_new: &DVector<f64>,
    cfg: &SolverConfig,
) -> f64 {
    let y = g_old - g_new;
    let gn = g_new.norm();
    if cfg.gradient_scaled_safeguards && gn > 0.0 && gn.is_finite() {
        let (lo, hi) = if gn < 1.0 {
            (gn, 1.0 / gn)
        } else {
            (1.0 / gn, gn)
        };
        bb_clamped(s, &y, lo, hi)
    } else {
        bb_clamped(s, &y, cfg.beta_min, cfg.beta_max)
    }
}

fn initial_beta(g: &DVector<f64>) -> f64 {
    let gn = g.norm();
    if gn > 0.0 && gn.is_finite() {
        1.0 / gn
    } else {
        1.0
    }
}

fn record(k: usize, ev: &MeritEval, step: f64, beta: f64) -> IterationRecord {
    IterationRecord {
        k,
        lambda: ev.lambda,
        merit_value: ev.value,
        grad_norm: ev.gradient.norm(),
        step,
        beta,
        shift: 0.0,
    }
}

/// SPG1: `d = P(x + beta g) - x`, then a line search along `x + alpha d` with
/// the accepted point pulled back to the unit sphere.
pub fn spg1(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_inputs(a, b, x0)?;
    let mode = cfg.backtrack.unwrap_or(Backtrack::QuadraticInterpolation);
    let mut run = Run::new(SolverKind::Spg1, a, b, cfg);

    let mut x = project_sphere_plus(x0);
    let mut ev = evaluate(cfg.merit, a, b, &x)?;
    let mut beta = initial_beta(&ev.gradient);
    run.record(record(0, &ev, 0.0, beta), &x);

    for k in 0..cfg.max_iters {
        let d = project_sphere_plus(&(&x + &ev.gradient * beta)) - &x;
        if d.norm() < cfg.tol && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k, &x, None));
        }
        let slope = ev.gradient.dot(&d);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = &x + &d * alpha;
            let f = match merit_value(cfg.merit, a, b, &trial) {
                Ok(f) => f,
                Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
            };
            if f >= ev.value + cfg.rho * alpha * slope {
                accepted = Some(trial);
                break;
            }
            alpha = reduce(mode, alpha, f, ev.value, slope);
        }
        let Some(trial) = accepted else {
            let msg = format!(
                "no sufficient increase after {} reductions",
                cfg.max_backtracks
            );
            return Ok(run.finish(Status::LineSearchFailure, k, &x, Some(msg)));
        };

        let x_new = &trial / trial.norm();
        let ev_new = match evaluate(cfg.merit, a, b, &x_new) {
            Ok(e) => e,
            Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
        };
        let s = &x_new - &x;
        let stop = run.generic_stop(
            s.norm(),
            (ev_new.lambda - ev.lambda).abs(),
            ev_new.gradient.norm(),
        );
        beta = next_beta(&s, &ev.gradient, &ev_new.gradient, cfg);
        run.record(record(k + 1, &ev_new, alpha, beta), &x_new);
        x = x_new;
        ev = ev_new;
        if stop && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k + 1, &x, None));
        }
    }
    Ok(run.finish(Status::MaxIters, cfg.max_iters, &x, None))
}

/// SPG2: trial points `P(x + alpha g)` with `alpha` starting at the spectral
/// step and reduced until `f(x+) >= f(x) + rho alpha g.(x+ - x)`.
pub fn spg2(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_inputs(a, b, x0)?;
    let mode = cfg.backtrack.unwrap_or(Backtrack::Halving);
    let mut run = Run::new(SolverKind::Spg2, a, b, cfg);

    let mut x = project_sphere_plus(x0);
    let mut ev = evaluate(cfg.merit, a, b, &x)?;
    let mut beta = initial_beta(&ev.gradient);
    run.record(record(0, &ev, 0.0, beta), &x);

    for k in 0..cfg.max_iters {
        let probe = project_sphere_plus(&(&x + &ev.gradient * beta));
        if (&probe - &x).norm() < cfg.tol && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k, &x, None));
        }

        let mut alpha = beta;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = project_sphere_plus(&(&x + &ev.gradient * alpha));
            let ev_trial = match evaluate(cfg.merit, a, b, &trial) {
                Ok(e) => e,
                Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
            };
            let gain = ev.gradient.dot(&(&trial - &x));
            if ev_trial.value >= ev.value + cfg.rho * alpha * gain {
                accepted = Some((trial, ev_trial));
                break;
            }
            // secant slope of the projection arc at the failed trial
            alpha = reduce(mode, alpha, ev_trial.value, ev.value, gain / alpha);
        }
        let Some((x_new, ev_new)) = accepted else {
            let msg = format!(
                "no sufficient increase after {} reductions",
                cfg.max_backtracks
            );
            return Ok(run.finish(Status::LineSearchFailure, k, &x, Some(msg)));
        };

        let s = &x_new - &x;
        let stop = run.generic_stop(
            s.norm(),
            (ev_new.lambda - ev.lambda).abs(),
            ev_new.gradient.norm(),
        );
        beta = next_beta(&s, &ev.gradient, &ev_new.gradient, cfg);
        run.record(record(k + 1, &ev_new, alpha, beta), &x_new);
        x = x_new;
        ev = ev_new;
        if stop && run.certified(ev.lambda, &x) {
            return Ok(run.finish(Status::Converged, k + 1, &x, None));
        }
    }
    Ok(run.finish(Status::MaxIters, cfg.max_iters, &x, None))
}
