//! Pareto eigenpairs of symmetric tensor pairs.
//!
//! Given symmetric order-m tensors `A` and `B`, find `(lambda, x)` with
//!
//! ```text
//! x >= 0,   w = (lambda B - A) x^{m-1} >= 0,   x . w = 0.
//! ```
//!
//! Such pairs are the stationary points of the Rayleigh quotient
//! `Ax^m / Bx^m` over the nonnegative part of the unit sphere, which the
//! solvers in [`solvers`] climb.
//!
//! ```
//! use teicp_core::{build, solve, ProblemSpec, SolverConfig, SolverKind};
//!
//! let p = build(&ProblemSpec::Ex2 { n: 5 }).unwrap();
//! let x0 = nalgebra::DVector::from_element(5, 1.0);
//! let r = solve(SolverKind::Spg1, &p.a, &p.b, &x0, &SolverConfig::default()).unwrap();
//! assert!((r.pair.lambda - 0.8).abs() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(v > 0.0)` also rejects NaN

pub mod error;
pub mod merit;
pub mod problems;
pub mod projection;
pub mod solvers;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use merit::{MeritEval, MeritKind};
pub use problems::{build, random_start, random_symmetric, Problem, ProblemSpec};
pub use projection::{b_normalize, project_orthant, project_sphere_plus, ProjectionTarget};
pub use solvers::{
    solve, Backtrack, EigenPair, IterationRecord, ShiftScaling, SolverConfig, SolverKind,
    SolverReport, Status,
};
pub use tensor::{
    contract_m, contract_m_minus_1, contract_m_minus_2, DenseSymmetricTensor, DenseTensor,
    HIdentity, Operator, TensorOperator, ZIdentity,
};
pub use verify::{is_pareto_eigenpair, residual, BKind, ResidualTriple};
