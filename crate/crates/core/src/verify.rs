//! Complementarity residuals, Pareto certification, the closed-form spectrum of
//! diagonal tensors and a central-difference gradient oracle.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DenseSymmetricTensor, HIdentity, Operator, TensorOperator, ZIdentity};

/// Violations of `x >= 0`, `w = (lambda B - A)x^{m-1} >= 0` and `x . w = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualTriple {
    pub primal: f64,
    pub dual: f64,
    pub comp: f64,
}

impl ResidualTriple {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.comp)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.primal <= tol && self.dual <= tol && self.comp <= tol
    }
}

pub fn residual(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    lambda: f64,
    x: &DVector<f64>,
) -> Result<ResidualTriple> {
    let w = b.contract_m_minus_1(x)? * lambda - a.contract_m_minus_1(x)?;
    Ok(ResidualTriple {
        primal: (-x.min()).max(0.0),
        dual: (-w.min()).max(0.0),
        comp: x.dot(&w).abs(),
    })
}

/// Residual of `(lambda, x / |x|)`.
pub fn unit_residual(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    lambda: f64,
    x: &DVector<f64>,
) -> Result<ResidualTriple> {
    let norm = x.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    residual(a, b, lambda, &(x / norm))
}

/// All three residual components of `(lambda, x / |x|)` are at most `tol`.
pub fn is_pareto_eigenpair(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    lambda: f64,
    x: &DVector<f64>,
    tol: f64,
) -> bool {
    unit_residual(a, b, lambda, x).is_ok_and(|r| r.within(tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BKind {
    Z,
    H,
}

impl BKind {
    pub fn operator(self, order: usize, dim: usize) -> Result<Operator> {
        Ok(match self {
            BKind::Z => Operator::Z(ZIdentity::new(order, dim)?),
            BKind::H => Operator::H(HIdentity::new(order, dim)?),
        })
    }
}

/// One Pareto eigenpair of a diagonal tensor with its support (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPair {
    pub lambda: f64,
    pub support: Vec<usize>,
    pub x: DVector<f64>,
}

/// Every Pareto eigenpair of the diagonal tensor `diag` that has a strictly
/// positive restriction to some support, one per admissible support, ordered
/// by support bitmask.
///
/// On a support `I` a positive eigenvector needs `a_i x_i^{m-2} = lambda`
/// (Z case, unit `x`) or `a_i = lambda` (H case) for every `i` in `I`.
pub fn diagonal_pareto_spectrum(diag: &[f64], m: usize, kind: BKind) -> Result<Vec<DiagonalPair>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidShape("empty diagonal".into()));
    }
    if n >= usize::BITS as usize {
        return Err(Error::InvalidShape(format!(
            "{n} supports cannot be enumerated"
        )));
    }
    if !m.is_multiple_of(2) || m < 2 {
        return Err(Error::OddOrder(m));
    }
    let a = DenseSymmetricTensor::diagonal(m, diag)?;
    let b = kind.operator(m, n)?;
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let Some((lambda, x)) = support_pair(diag, m, kind, &support) else {
            continue;
        };
        if residual(&a, &b, lambda, &x)?.within(1e-12) {
            out.push(DiagonalPair { lambda, support, x });
        }
    }
    Ok(out)
}

fn support_pair(
    diag: &[f64],
    m: usize,
    kind: BKind,
    support: &[usize],
) -> Option<(f64, DVector<f64>)> {
    let n = diag.len();
    let vals: Vec<f64> = support.iter().map(|&i| diag[i]).collect();
    let mut x = DVector::zeros(n);
    if support.len() == 1 {
        x[support[0]] = 1.0;
        return Some((vals[0], x));
    }
    let uniform = |x: &mut DVector<f64>| {
        let c = 1.0 / (support.len() as f64).sqrt();
        for &i in support {
            x[i] = c;
        }
    };
    let all_equal = vals.iter().all(|&v| v == vals[0]);
    if kind == BKind::H || m == 2 {
        if !all_equal {
            return None;
        }
        uniform(&mut x);
        return Some((vals[0], x));
    }
    if vals.iter().all(|&v| v == 0.0) {
        uniform(&mut x);
        return Some((0.0, x));
    }
    let positive = vals.iter().all(|&v| v > 0.0);
    let negative = vals.iter().all(|&v| v < 0.0);
    if !positive && !negative {
        return None;
    }
    let p = (m - 2) as f64;
    let s: f64 = vals.iter().map(|v| v.abs().powf(-2.0 / p)).sum();
    let lambda = s.powf(-p / 2.0).copysign(vals[0]);
    for (&i, &ai) in support.iter().zip(&vals) {
        x[i] = (lambda / ai).powf(1.0 / p);
    }
    Some((lambda, x))
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn fd_gradient<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}
