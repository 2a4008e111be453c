//! Property checks shared by the `properties` test target and the acceptance
//! suite. Each check drives a deterministic proptest runner and panics on the
//! first counterexample.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use teicp_core::merit::{
    log_gradient, log_hessian, log_value, rayleigh_gradient, rayleigh_hessian, rayleigh_value,
};
use teicp_core::projection::{is_feasible, project_orthant};
use teicp_core::solvers::ascent_direction_check;
use teicp_core::tensor::symmetrize;
use teicp_core::verify::{diagonal_pareto_spectrum, fd_gradient, residual, BKind};
use teicp_core::{
    b_normalize, is_pareto_eigenpair, project_sphere_plus, random_symmetric, solve,
    DenseSymmetricTensor, DenseTensor, HIdentity, SolverConfig, SolverKind, Status, TensorOperator,
    ZIdentity,
};

fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>)
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{e}");
    }
}

fn rel_close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs().max(got.abs()).max(1e-300)
}

fn vec_strategy(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(lo..hi, n).prop_map(DVector::from_vec)
}

/// Random symmetric tensor of order 4, dimension 1 to 5, and a point.
fn tensor_and_point() -> impl Strategy<Value = (u64, usize, DVector<f64>)> {
    (1usize..=5, any::<u64>())
        .prop_flat_map(|(n, seed)| (Just(seed), Just(n), vec_strategy(n, -1.0, 1.0)))
}

/// Point in the strictly positive part of the unit sphere.
fn sphere_point(n: usize) -> impl Strategy<Value = DVector<f64>> {
    vec_strategy(n, 0.05, 1.0).prop_map(|v| v.normalize())
}

/// Random A plus a diagonal boost `c I`. Entries of A lie in [-1, 1], so
/// `c > n^3` makes `Ax^4 > 0` away from the origin.
fn boosted(seed: u64, n: usize, c: f64) -> DenseSymmetricTensor {
    let raw = random_symmetric(n, 4, seed).unwrap();
    DenseSymmetricTensor::from_fn(4, n, |idx| {
        let diag = if idx.iter().all(|&i| i == idx[0]) {
            c
        } else {
            0.0
        };
        raw.get(idx).unwrap() + diag
    })
    .unwrap()
}

fn fd_jacobian(
    grad: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = h;
        jac.set_column(j, &((grad(&(x + &e)) - grad(&(x - &e))) / (2.0 * h)));
    }
    jac
}

pub fn euler_identities() {
    check(50, tensor_and_point(), |(seed, n, x)| {
        let t = random_symmetric(n, 4, seed).unwrap();
        let scalar = t.contract_m(&x).unwrap();
        let vector = t.contract_m_minus_1(&x).unwrap();
        let matrix = t.contract_m_minus_2(&x).unwrap();
        let scale = t.entries().iter().fold(0.0f64, |a, v| a.max(v.abs())) * x.norm().powi(4);
        prop_assert!((x.dot(&vector) - scalar).abs() <= 1e-10 * scale.max(scalar.abs()));
        prop_assert!(
            ((x.transpose() * &matrix * &x)[0] - scalar).abs() <= 1e-10 * scale.max(scalar.abs())
        );
        prop_assert_eq!(&matrix, &matrix.transpose());
        Ok(())
    });
}

pub fn homogeneity() {
    check(
        50,
        (tensor_and_point(), 0.1f64..10.0),
        |((seed, n, x), c)| {
            let t = random_symmetric(n, 4, seed).unwrap();
            let base = t.contract_m(&x).unwrap();
            let scaled = t.contract_m(&(&x * c)).unwrap();
            let scale =
                t.entries().iter().fold(0.0f64, |a, v| a.max(v.abs())) * (x.norm() * c).powi(4);
            prop_assert!((scaled - c.powi(4) * base).abs() <= 1e-10 * scale.max(1e-300));
            Ok(())
        },
    );
}

pub fn identity_operators() {
    check(
        50,
        (1usize..=5).prop_flat_map(|n| vec_strategy(n, -2.0, 2.0)),
        |x| {
            let n = x.len();
            let h = HIdentity::new(4, n).unwrap();
            let d = h.to_dense();
            prop_assert!((h.contract_m(&x).unwrap() - d.contract_m(&x).unwrap()).abs() <= 1e-12);
            prop_assert!(
                (h.contract_m_minus_1(&x).unwrap() - d.contract_m_minus_1(&x).unwrap()).amax()
                    <= 1e-12
            );
            prop_assert!(
                (h.contract_m_minus_2(&x).unwrap() - d.contract_m_minus_2(&x).unwrap()).amax()
                    <= 1e-12
            );

            let z = ZIdentity::new(4, n).unwrap();
            let r = x.norm();
            prop_assert!(rel_close(z.contract_m(&x).unwrap(), r.powi(4), 1e-12));
            prop_assert!(
                (z.contract_m_minus_1(&x).unwrap() - &x * (r * r)).amax()
                    <= 1e-12 * r.powi(3).max(1.0)
            );
            let u = x.normalize();
            if u.iter().all(|v| v.is_finite()) {
                prop_assert!((z.contract_m_minus_1(&u).unwrap() - &u).amax() <= 1e-12);
            }
            Ok(())
        },
    );
}

pub fn symmetrize_invariance() {
    let perm = prop::collection::vec(0usize..4, 4).prop_filter("permutation", |p| {
        let mut s = p.clone();
        s.sort_unstable();
        s == [0, 1, 2, 3]
    });
    check(
        100,
        (any::<u64>(), prop::collection::vec(0usize..3, 4), perm),
        |(seed, idx, p)| {
            let raw = random_symmetric(3, 4, seed)
                .unwrap()
                .entries()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + i as f64))
                .collect::<Vec<_>>();
            let s = symmetrize(&DenseTensor::from_entries(4, 3, raw).unwrap());
            let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
            prop_assert_eq!(
                s.get(&idx).unwrap().to_bits(),
                s.get(&permuted).unwrap().to_bits()
            );
            let again = symmetrize(&s.to_dense());
            let diff = again
                .entries()
                .iter()
                .zip(s.entries())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(diff <= 1e-13);
            Ok(())
        },
    );
}

pub fn tangency() {
    check(
        100,
        (2usize..=5, any::<u64>()).prop_flat_map(|(n, s)| (Just(s), sphere_point(n))),
        |(seed, x)| {
            let n = x.len();
            let a = random_symmetric(n, 4, seed).unwrap();
            let z = ZIdentity::new(4, n).unwrap();
            let g = rayleigh_gradient(&a, &z, &x).unwrap();
            prop_assert!(x.dot(&g).abs() <= 1e-10 * g.norm().max(1e-12));
            Ok(())
        },
    );
}

pub fn degree_zero_quotient() {
    check(
        100,
        (
            (2usize..=5, any::<u64>()).prop_flat_map(|(n, s)| (Just(s), sphere_point(n))),
            0.1f64..10.0,
        ),
        |((seed, x), c)| {
            let n = x.len();
            let a = random_symmetric(n, 4, seed).unwrap();
            let z = ZIdentity::new(4, n).unwrap();
            let cx = &x * c;
            prop_assert!(
                (rayleigh_value(&a, &z, &cx).unwrap() - rayleigh_value(&a, &z, &x).unwrap()).abs()
                    <= 1e-10
            );
            let g = rayleigh_gradient(&a, &z, &x).unwrap();
            let gc = rayleigh_gradient(&a, &z, &cx).unwrap();
            prop_assert!((&gc - &g / c).norm() <= 1e-8 * g.norm().max(1e-12) / c);
            Ok(())
        },
    );
}

pub fn log_merit_identity() {
    check(
        50,
        (2usize..=4, any::<u64>()).prop_flat_map(|(n, s)| (Just(s), sphere_point(n))),
        |(seed, x)| {
            let n = x.len();
            let a = boosted(seed, n, 2.0 * (n as f64).powi(3));
            let z = ZIdentity::new(4, n).unwrap();
            let r = rayleigh_value(&a, &z, &x).unwrap();
            prop_assert!(rel_close(log_value(&a, &z, &x).unwrap().exp(), r, 1e-12));
            Ok(())
        },
    );
}

/// Rayleigh and logarithmic derivatives against central differences
/// (h = 1e-6 for gradients, 1e-5 for Hessians) with B the Z- or H-identity.
pub fn derivative_oracles() {
    check(
        20,
        (
            (2usize..=4, any::<u64>()).prop_flat_map(|(n, s)| (Just(s), sphere_point(n))),
            any::<bool>(),
        ),
        |((seed, x), use_h)| {
            let n = x.len();
            let b: Box<dyn TensorOperator> = if use_h {
                Box::new(HIdentity::new(4, n).unwrap())
            } else {
                Box::new(ZIdentity::new(4, n).unwrap())
            };
            let a = random_symmetric(n, 4, seed).unwrap();
            let g = rayleigh_gradient(&a, b.as_ref(), &x).unwrap();
            let fd = fd_gradient(|y| rayleigh_value(&a, b.as_ref(), y), &x, 1e-6).unwrap();
            prop_assert!(
                (&g - &fd).norm() <= 1e-5 * g.norm().max(1e-3),
                "grad {} vs {}",
                g,
                fd
            );
            let h = rayleigh_hessian(&a, b.as_ref(), &x).unwrap();
            let fdh = fd_jacobian(|y| rayleigh_gradient(&a, b.as_ref(), y).unwrap(), &x, 1e-5);
            prop_assert!((&h - &fdh).norm() <= 1e-4 * h.norm().max(1e-2));
            prop_assert_eq!(&h, &h.transpose());

            let pa = boosted(seed, n, 2.0 * (n as f64).powi(3));
            let lg = log_gradient(&pa, b.as_ref(), &x).unwrap();
            let lfd = fd_gradient(|y| log_value(&pa, b.as_ref(), y), &x, 1e-6).unwrap();
            prop_assert!((&lg - &lfd).norm() <= 1e-5 * lg.norm().max(1e-3));
            let chain = rayleigh_gradient(&pa, b.as_ref(), &x).unwrap()
                / rayleigh_value(&pa, b.as_ref(), &x).unwrap();
            prop_assert!((&lg - &chain).norm() <= 1e-10 * lg.norm().max(1e-12));
            let lh = log_hessian(&pa, b.as_ref(), &x).unwrap();
            let lfdh = fd_jacobian(|y| log_gradient(&pa, b.as_ref(), y).unwrap(), &x, 1e-5);
            prop_assert!((&lh - &lfdh).norm() <= 1e-4 * lh.norm().max(1e-2));
            prop_assert_eq!(&lh, &lh.transpose());
            Ok(())
        },
    );
}

/// `g.d >= |d|^2 / beta` for `d = P(x + beta g) - x`.
pub fn ascent_inequality() {
    let strategy = (2usize..=5, any::<u64>())
        .prop_flat_map(|(n, s)| (Just(s), vec_strategy(n, 0.0, 1.0), 1e-6f64..=10.0));
    check(1000, strategy, |(seed, raw, beta)| {
        let n = raw.len();
        let x = project_sphere_plus(&raw);
        let a = random_symmetric(n, 4, seed % 64).unwrap();
        let z = ZIdentity::new(4, n).unwrap();
        let g = rayleigh_gradient(&a, &z, &x).unwrap();
        let (_, lhs, rhs) = ascent_direction_check(&x, beta, &g);
        prop_assert!(lhs >= rhs - 1e-10, "lhs {lhs} rhs {rhs}");
        Ok(())
    });
}

fn random_problem() -> impl Strategy<Value = (u64, usize, bool, DVector<f64>)> {
    (2usize..=4, any::<u64>(), any::<bool>())
        .prop_flat_map(|(n, s, h)| (Just(s), Just(n), Just(h), vec_strategy(n, 0.0, 1.0)))
        .prop_filter("nonzero start", |(_, _, _, x)| x.norm() > 1e-3)
}

/// Per-run invariants of every solver on random problems: ascent and the
/// ascent inequality for SPG iterates, feasibility of iterates, certified
/// convergence, nonnegative shifts and trace length.
pub fn solver_runs() {
    let cfg = SolverConfig {
        record_iterates: true,
        max_iters: 200,
        ..SolverConfig::default()
    };
    check(24, random_problem(), |(seed, n, use_h, x0)| {
        let a = if use_h {
            boosted(seed, n, 2.0)
        } else {
            random_symmetric(n, 4, seed).unwrap()
        };
        let b: Box<dyn TensorOperator> = if use_h {
            Box::new(HIdentity::new(4, n).unwrap())
        } else {
            Box::new(ZIdentity::new(4, n).unwrap())
        };
        for kind in SolverKind::ALL {
            let r = solve(kind, &a, b.as_ref(), &x0, &cfg).unwrap();
            prop_assert_eq!(r.trace.len(), r.iters + 1);
            prop_assert_eq!(r.iterates.len(), r.trace.len());
            if r.status == Status::Converged {
                prop_assert!(is_pareto_eigenpair(
                    &a,
                    b.as_ref(),
                    r.pair.lambda,
                    &r.pair.x,
                    1e-4
                ));
            }
            prop_assert!(r.trace.iter().all(|t| t.shift >= 0.0));
            for x in &r.iterates {
                prop_assert!(x.iter().all(|&v| v >= 0.0));
                match kind {
                    SolverKind::Spa | SolverKind::Sspa => {
                        prop_assert!((b.contract_m(x).unwrap() - 1.0).abs() <= 1e-10)
                    }
                    _ => prop_assert!(is_feasible(x, 1e-10)),
                }
            }
            if matches!(kind, SolverKind::Spg1 | SolverKind::Spg2) {
                for w in r.trace.windows(2) {
                    prop_assert!(
                        w[1].merit_value >= w[0].merit_value - 1e-12,
                        "{kind} not monotone"
                    );
                }
                for (x, rec) in r.iterates.iter().zip(&r.trace) {
                    let g = rayleigh_gradient(&a, b.as_ref(), x).unwrap();
                    let (_, lhs, rhs) = ascent_direction_check(x, rec.beta, &g);
                    prop_assert!(lhs >= rhs - 1e-10);
                }
            }
            let again = solve(kind, &a, b.as_ref(), &x0, &cfg).unwrap();
            prop_assert_eq!(&again.trace, &r.trace);
        }
        Ok(())
    });
}

pub fn projection_in_feasible_set() {
    let v = (1usize..=6, 0u8..4).prop_flat_map(|(n, mode)| {
        vec_strategy(n, -5.0, 5.0).prop_map(move |v| match mode {
            0 => v.map(|x| -x.abs()),
            1 => DVector::zeros(v.len()),
            _ => v,
        })
    });
    check(1000, v, |v| {
        let p = project_sphere_plus(&v);
        prop_assert!(is_feasible(&p, 1e-12));
        prop_assert!((project_sphere_plus(&p) - &p).amax() <= 1e-15);
        let o = project_orthant(&v);
        prop_assert_eq!(project_orthant(&o), o.clone());
        let h = HIdentity::new(4, v.len()).unwrap();
        if let Ok(u) = b_normalize(&p, &h) {
            prop_assert!((b_normalize(&u, &h).unwrap() - &u).amax() <= 1e-12);
        }
        Ok(())
    });
}

/// The projection beats 10^4 random feasible points for each target.
pub fn projection_nearest_point() {
    let samples = prop::collection::vec(sphere_point(3), 10_000);
    check(100, (vec_strategy(3, -2.0, 2.0), samples), |(v, xs)| {
        let best = (project_sphere_plus(&v) - &v).norm();
        for x in &xs {
            prop_assert!(best <= (x - &v).norm() + 1e-6);
        }
        Ok(())
    });
}

pub fn residual_homogeneity() {
    check(
        50,
        (random_problem(), 0.1f64..5.0, -2.0f64..2.0),
        |((seed, n, _, x), s, lambda)| {
            let a = random_symmetric(n, 4, seed).unwrap();
            let z = ZIdentity::new(4, n).unwrap();
            let r1 = residual(&a, &z, lambda, &x).unwrap();
            let r2 = residual(&a, &z, lambda, &(&x * s)).unwrap();
            prop_assert!((r2.comp - s.powi(4) * r1.comp).abs() <= 1e-10 * r2.comp.max(1e-12));
            Ok(())
        },
    );
}

fn diag_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=3).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n))
}

pub fn diagonal_spectrum_certifies() {
    check(100, (diag_strategy(), any::<bool>()), |(diag, use_h)| {
        let kind = if use_h { BKind::H } else { BKind::Z };
        let a = DenseSymmetricTensor::diagonal(4, &diag).unwrap();
        let b = kind.operator(4, diag.len()).unwrap();
        for p in diagonal_pareto_spectrum(&diag, 4, kind).unwrap() {
            prop_assert!(is_pareto_eigenpair(&a, &b, p.lambda, &p.x, 1e-10));
        }
        Ok(())
    });
}

/// Grid points of the nonnegative unit sphere for `n <= 3` at spacing `h`.
fn sphere_grid(n: usize, h: f64) -> Vec<DVector<f64>> {
    let steps = (std::f64::consts::FRAC_PI_2 / h).ceil() as usize;
    let angle = |i: usize| (i as f64 * h).min(std::f64::consts::FRAC_PI_2);
    match n {
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..=steps)
            .map(|i| DVector::from_column_slice(&[angle(i).cos(), angle(i).sin()]))
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..=steps {
                for j in 0..=steps {
                    let (t, p) = (angle(i), angle(j));
                    out.push(DVector::from_column_slice(&[
                        t.sin() * p.cos(),
                        t.sin() * p.sin(),
                        t.cos(),
                    ]));
                    if i == 0 {
                        break;
                    }
                }
            }
            out
        }
    }
}

/// No Pareto eigenvalue found by scanning the sphere or refining with SPG1
/// is missing from the enumerated diagonal spectrum.
pub fn diagonal_spectrum_complete() {
    let cfg = SolverConfig::default();
    check(8, diag_strategy(), |diag| {
        let n = diag.len();
        let a = DenseSymmetricTensor::diagonal(4, &diag).unwrap();
        let z = ZIdentity::new(4, n).unwrap();
        let spectrum: Vec<f64> = diagonal_pareto_spectrum(&diag, 4, BKind::Z)
            .unwrap()
            .into_iter()
            .map(|p| p.lambda)
            .collect();
        let near = |lam: f64, gap: f64| spectrum.iter().any(|&s| (s - lam).abs() <= gap);
        let grid = sphere_grid(n, 0.01);
        for x in &grid {
            let lam = rayleigh_value(&a, &z, x).unwrap();
            // grid points that nearly satisfy the complementarity system
            if residual(&a, &z, lam, x).unwrap().max() < 1e-3 {
                prop_assert!(near(lam, 2e-2), "scan found {lam} outside {spectrum:?}");
            }
        }
        let stride = (grid.len() / 40).max(1);
        for x in grid.iter().step_by(stride) {
            let r = solve(SolverKind::Spg1, &a, &z, x, &cfg).unwrap();
            if r.status == Status::Converged {
                prop_assert!(
                    near(r.pair.lambda, 1e-4),
                    "SPG1 found {} outside {spectrum:?}",
                    r.pair.lambda
                );
            }
        }
        Ok(())
    });
}

pub fn run_all() {
    euler_identities();
    homogeneity();
    identity_operators();
    symmetrize_invariance();
    tangency();
    degree_zero_quotient();
    log_merit_identity();
    derivative_oracles();
    ascent_inequality();
    solver_runs();
    projection_in_feasible_set();
    projection_nearest_point();
    residual_homogeneity();
    diagonal_spectrum_certifies();
    diagonal_spectrum_complete();
}
