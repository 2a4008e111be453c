//! Shared fixtures for the criterion benches.

use teicp_core::{build, Problem, ProblemSpec};

/// Built problem and its documented starting point.
pub fn fixture(spec: ProblemSpec) -> (Problem, nalgebra::DVector<f64>) {
    (
        build(&spec).expect("built-in problem"),
        spec.default_start(),
    )
}
