//! Rayleigh quotient `Ax^m / Bx^m` and logarithmic merit `ln Ax^m - ln Bx^m`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::TensorOperator;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeritKind {
    #[default]
    Rayleigh,
    #[serde(rename = "log")]
    Logarithmic,
}

impl fmt::Display for MeritKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeritKind::Rayleigh => "rayleigh",
            MeritKind::Logarithmic => "log",
        })
    }
}

impl FromStr for MeritKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(MeritKind::Rayleigh),
            "log" | "logarithmic" => Ok(MeritKind::Logarithmic),
            other => Err(format!(
                "unknown merit '{other}' (expected rayleigh or log)"
            )),
        }
    }
}

/// Merit value and gradient at a point; `lambda` is always the Rayleigh quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub lambda: f64,
}

/// First-order contractions shared by every merit quantity.
struct Parts {
    m: f64,
    am: f64,
    a1: DVector<f64>,
    bm: f64,
    b1: DVector<f64>,
}

fn check_pair(a: &dyn TensorOperator, b: &dyn TensorOperator) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::InvalidShape(format!(
            "A has order {}, B has order {}",
            a.order(),
            b.order()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

fn parts(a: &dyn TensorOperator, b: &dyn TensorOperator, x: &DVector<f64>) -> Result<Parts> {
    check_pair(a, b)?;
    let a1 = a.contract_m_minus_1(x)?;
    let b1 = b.contract_m_minus_1(x)?;
    Ok(Parts {
        m: a.order() as f64,
        am: a.contract_m(x)?,
        a1,
        bm: b.contract_m(x)?,
        b1,
    })
}

impl Parts {
    fn rayleigh(&self) -> Result<f64> {
        if self.bm == 0.0 || !self.bm.is_finite() {
            return Err(Error::SingularDenominator(self.bm));
        }
        Ok(self.am / self.bm)
    }

    fn require_positive(&self) -> Result<()> {
        if !(self.am > 0.0) {
            return Err(Error::NonPositive {
                tensor: "A",
                value: self.am,
            });
        }
        if !(self.bm > 0.0) {
            return Err(Error::NonPositive {
                tensor: "B",
                value: self.bm,
            });
        }
        Ok(())
    }
}

/// `u v^T + v u^T`.
fn sym_outer(u: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let uv = u * v.transpose();
    &uv + uv.transpose()
}

pub fn rayleigh_value(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<f64> {
    check_pair(a, b)?;
    let bm = b.contract_m(x)?;
    if bm == 0.0 || !bm.is_finite() {
        return Err(Error::SingularDenominator(bm));
    }
    Ok(a.contract_m(x)? / bm)
}

/// `(m / Bx^m)(Ax^{m-1} - lambda Bx^{m-1})`.
pub fn rayleigh_gradient(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let p = parts(a, b, x)?;
    let lambda = p.rayleigh()?;
    Ok((&p.a1 - &p.b1 * lambda) * (p.m / p.bm))
}

pub fn rayleigh_hessian(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let p = parts(a, b, x)?;
    p.rayleigh()?;
    let a2 = a.contract_m_minus_2(x)?;
    let b2 = b.contract_m_minus_2(x)?;
    let (m, am, bm) = (p.m, p.am, p.bm);
    let h = a2 * (m * (m - 1.0) / bm)
        - (b2 * (m * (m - 1.0) * am) + sym_outer(&p.a1, &p.b1) * (m * m)) / (bm * bm)
        + sym_outer(&p.b1, &p.b1) * (m * m * am / (bm * bm * bm));
    Ok(symmetric_part(h))
}

pub fn log_value(a: &dyn TensorOperator, b: &dyn TensorOperator, x: &DVector<f64>) -> Result<f64> {
    check_pair(a, b)?;
    let am = a.contract_m(x)?;
    let bm = b.contract_m(x)?;
    if !(am > 0.0) {
        return Err(Error::NonPositive {
            tensor: "A",
            value: am,
        });
    }
    if !(bm > 0.0) {
        return Err(Error::NonPositive {
            tensor: "B",
            value: bm,
        });
    }
    Ok(am.ln() - bm.ln())
}

/// `m Ax^{m-1} / Ax^m - m Bx^{m-1} / Bx^m`.
pub fn log_gradient(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let p = parts(a, b, x)?;
    p.require_positive()?;
    Ok(&p.a1 * (p.m / p.am) - &p.b1 * (p.m / p.bm))
}

pub fn log_hessian(
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let p = parts(a, b, x)?;
    p.require_positive()?;
    let a2 = a.contract_m_minus_2(x)?;
    let b2 = b.contract_m_minus_2(x)?;
    let (m, am, bm) = (p.m, p.am, p.bm);
    let h = a2 * (m * (m - 1.0) / am) - b2 * (m * (m - 1.0) / bm)
        + &p.b1 * p.b1.transpose() * (m * m / (bm * bm))
        - &p.a1 * p.a1.transpose() * (m * m / (am * am));
    Ok(symmetric_part(h))
}

/// Merit value and gradient for `kind`, with the Rayleigh quotient alongside.
pub fn evaluate(
    kind: MeritKind,
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<MeritEval> {
    let p = parts(a, b, x)?;
    let lambda = p.rayleigh()?;
    match kind {
        MeritKind::Rayleigh => Ok(MeritEval {
            value: lambda,
            gradient: (&p.a1 - &p.b1 * lambda) * (p.m / p.bm),
            lambda,
        }),
        MeritKind::Logarithmic => {
            p.require_positive()?;
            Ok(MeritEval {
                value: p.am.ln() - p.bm.ln(),
                gradient: &p.a1 * (p.m / p.am) - &p.b1 * (p.m / p.bm),
                lambda,
            })
        }
    }
}

/// Merit value only, for line-search trials.
pub fn merit_value(
    kind: MeritKind,
    a: &dyn TensorOperator,
    b: &dyn TensorOperator,
    x: &DVector<f64>,
) -> Result<f64> {
    match kind {
        MeritKind::Rayleigh => rayleigh_value(a, b, x),
        MeritKind::Logarithmic => log_value(a, b, x),
    }
}

/// Rounds away the asymmetry left by floating-point evaluation order.
fn symmetric_part(h: DMatrix<f64>) -> DMatrix<f64> {
    (&h + h.transpose()) * 0.5
}
