//! Projections onto `S^{n-1}_+ = {x : |x| = 1, x >= 0}`, onto the nonnegative
//! orthant, and the B-normalization `u / (Bu^m)^{1/m}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::TensorOperator;

/// Nearest point of `S^{n-1}_+` to `v`.
///
/// Clips negatives and normalizes. When nothing survives the clip, the nearest
/// point is the vertex `e_i` maximizing `v_i` (smallest `i` on ties).
pub fn project_sphere_plus(v: &DVector<f64>) -> DVector<f64> {
    let plus = project_orthant(v);
    let norm = plus.norm();
    if norm > 0.0 {
        return plus / norm;
    }
    let mut best = 0;
    for (i, &vi) in v.iter().enumerate() {
        if vi > v[best] {
            best = i;
        }
    }
    let mut e = DVector::zeros(v.len());
    e[best] = 1.0;
    e
}

/// Componentwise `max(v_i, 0)`.
pub fn project_orthant(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| x.max(0.0))
}

/// Rescales `u` so that `Bu^m = 1`.
pub fn b_normalize(u: &DVector<f64>, b: &dyn TensorOperator) -> Result<DVector<f64>> {
    let bm = b.contract_m(u)?;
    if !(bm > 0.0) || !bm.is_finite() {
        return Err(Error::Scaling(bm));
    }
    Ok(u / bm.powf(1.0 / b.order() as f64))
}

/// Target set of the projection step in the scaling methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionTarget {
    /// `S^{n-1}_+`, then B-normalize.
    #[default]
    SpherePlus,
    /// Nonnegative orthant, then B-normalize.
    Orthant,
}

/// Projection step of the scaling methods: project onto `target`, then B-normalize.
pub fn project_scaled(
    v: &DVector<f64>,
    target: ProjectionTarget,
    b: &dyn TensorOperator,
) -> Result<DVector<f64>> {
    let u = match target {
        ProjectionTarget::SpherePlus => project_sphere_plus(v),
        ProjectionTarget::Orthant => project_orthant(v),
    };
    b_normalize(&u, b)
}

/// `x >= 0` and `|x| = 1` within `tol`.
pub fn is_feasible(x: &DVector<f64>, tol: f64) -> bool {
    x.iter().all(|&v| v >= 0.0) && (x.norm() - 1.0).abs() <= tol
}
