//! Scaling-and-projection (SPA) and its shifted variant (SSPA).
//!
//! Iterates live on `Bx^m = 1`. The step is `x + alpha v` with `alpha = |v|`,
//! followed by the configured projection and B-normalization.

use nalgebra::DVector;

use super::spp::shift;
use super::{
    check_inputs, IterationRecord, Run, ShiftScaling, SolverConfig, SolverKind, SolverReport,
    Status,
};
use crate::error::Result;
use crate::projection::{b_normalize, project_scaled, project_sphere_plus};
use crate::tensor::TensorOperator;

/// Rayleigh quotient and residual `y = Ax^{m-1} - lambda Bx^{m-1}`.
fn lambda_residual(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<(f64, DVector<f64>)> {
    let lambda = crate::merit::rayleigh_value(a, b, x)?;
    let y = a.contract_m_minus_1(x)? - b.contract_m_minus_1(x)? * lambda;
    Ok((lambda, y))
}

fn record(k: usize, lambda: f64, y: &DVector<f64>, step: f64, shift: f64) -> IterationRecord {
    IterationRecord {
        k,
        lambda,
        merit_value: lambda,
        grad_norm: y.norm(),
        step,
        beta: 0.0,
        shift,
    }
}

pub fn spa(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    u0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    scaled(SolverKind::Spa, a, b, u0, cfg)
}

pub fn sspa(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    u0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    scaled(SolverKind::Sspa, a, b, u0, cfg)
}

fn scaled(
    kind: SolverKind,
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    u0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_inputs(a, b, u0)?;
    let m = a.order() as f64;
    let shifted = kind == SolverKind::Sspa;
    let mut run = Run::new(kind, a, b, cfg);

    let mut x = b_normalize(&project_sphere_plus(u0), b)?;
    let (mut lambda, mut y) = lambda_residual(a, b, &x)?;
    run.record(record(0, lambda, &y, 0.0, 0.0), &x);

    for k in 0..cfg.max_iters {
        if !shifted && y.norm() <= cfg.tol && run.certified(lambda, &x) {
            return Ok(run.finish(Status::Converged, k, &x, None));
        }
        let (direction, r) = if shifted {
            let r = match shift(a, b, &x, cfg.tau) {
                Ok(r) => r,
                Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
            };
            let coef = match cfg.shift_scaling {
                ShiftScaling::Residual => r,
                ShiftScaling::Order => r * m,
            };
            (&y + &x * coef, r)
        } else {
            (y.clone(), 0.0)
        };
        let alpha = direction.norm();

        let step = project_scaled(&(&x + &direction * alpha), cfg.projection, b)
            .and_then(|x_new| lambda_residual(a, b, &x_new).map(|(l, yn)| (x_new, l, yn)));
        let (x_new, lambda_new, y_new) = match step {
            Ok(s) => s,
            Err(e) => return Ok(run.finish(Status::DomainError, k, &x, Some(e.to_string()))),
        };
        let stop = run.generic_stop(
            (&x_new - &x).norm(),
            (lambda_new - lambda).abs(),
            y_new.norm(),
        );
        run.record(record(k + 1, lambda_new, &y_new, alpha, r), &x_new);
        x = x_new;
        lambda = lambda_new;
        y = y_new;
        if stop && run.certified(lambda, &x) {
            return Ok(run.finish(Status::Converged, k + 1, &x, None));
        }
    }
    Ok(run.finish(Status::MaxIters, cfg.max_iters, &x, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build, ProblemSpec};
    use crate::projection::ProjectionTarget;

    #[test]
    fn iterates_stay_b_normalized() {
        let p = build(&ProblemSpec::Ex6 { n: 5 }).unwrap();
        let cfg = SolverConfig {
            record_iterates: true,
            ..SolverConfig::default()
        };
        let r = sspa(&p.a, &p.b, &ProblemSpec::Ex6 { n: 5 }.default_start(), &cfg).unwrap();
        assert_eq!(r.iterates.len(), r.trace.len());
        for x in &r.iterates {
            assert!((p.b.contract_m(x).unwrap() - 1.0).abs() < 1e-10);
            assert!(x.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn projection_targets_give_identical_runs() {
        let p = build(&ProblemSpec::Ex3).unwrap();
        let x0 = ProblemSpec::Ex3.default_start();
        let base = SolverConfig::default();
        let orth = SolverConfig {
            projection: ProjectionTarget::Orthant,
            ..base.clone()
        };
        let r1 = spa(&p.a, &p.b, &x0, &base).unwrap();
        let r2 = spa(&p.a, &p.b, &x0, &orth).unwrap();
        assert_eq!(r1.iters, r2.iters);
        assert!((r1.pair.lambda - r2.pair.lambda).abs() < 1e-12);
    }

    #[test]
    fn huge_tau_freezes_the_iterate() {
        let p = build(&ProblemSpec::Ex1).unwrap();
        let cfg = SolverConfig {
            tau: 1e3,
            certify_tol: None,
            ..SolverConfig::default()
        };
        let x0 = DVector::from_column_slice(&[0.2678, 0.6446, 0.7161]);
        let r = sspa(&p.a, &p.b, &x0, &cfg).unwrap();
        assert_eq!(r.iters, 1);
        assert!((&r.pair.x - x0.normalize()).amax() < 1e-3);
    }

    #[test]
    fn order_scaled_shift_is_selectable() {
        let p = build(&ProblemSpec::Ex1).unwrap();
        let x0 = DVector::from_element(3, 1.0);
        let base = SolverConfig::default();
        let order = SolverConfig {
            shift_scaling: ShiftScaling::Order,
            ..base.clone()
        };
        let r1 = sspa(&p.a, &p.b, &x0, &base).unwrap();
        let r2 = sspa(&p.a, &p.b, &x0, &order).unwrap();
        assert!(r2.iters > r1.iters);
        assert!((r2.pair.lambda - 0.3633).abs() < 1e-3);
    }
}
