//! Built-in test problems and seeded random instances.
//!
//! `ex1` to `ex3` pair a dense order-4 tensor with the Z-identity; `ex4` to
//! `ex6` use the H-identity. Formula-based problems use 1-based indices inside
//! their formulas.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{symmetrize, DenseSymmetricTensor, DenseTensor, Operator};
use crate::verify::BKind;

/// The 15 index classes of a symmetric 3-dimensional order-4 tensor
/// (1-based); each value is copied to every permutation.
const EX1_CLASSES: [([usize; 4], f64); 15] = [
    ([1, 1, 1, 1], 0.2883),
    ([1, 1, 1, 2], -0.0031),
    ([1, 1, 1, 3], 0.1973),
    ([1, 1, 2, 2], -0.2485),
    ([1, 1, 2, 3], -0.2939),
    ([1, 1, 3, 3], 0.3847),
    ([1, 2, 2, 2], 0.2972),
    ([1, 2, 2, 3], 0.1862),
    ([1, 2, 3, 3], 0.0919),
    ([1, 3, 3, 3], -0.3619),
    ([2, 2, 2, 2], 0.1241),
    ([2, 2, 2, 3], -0.3420),
    ([2, 2, 3, 3], 0.2127),
    ([2, 3, 3, 3], 0.2727),
    ([3, 3, 3, 3], -0.3054),
];

/// Literal positions (1-based) set before permutation averaging.
const EX3_POSITIONS: [([usize; 4], f64); 9] = [
    ([1, 1, 1, 1], 1.00397),
    ([2, 2, 2, 2], 0.99397),
    ([3, 3, 3, 3], 1.00207),
    ([1, 2, 2, 2], 0.00401),
    ([2, 1, 1, 1], 0.00788),
    ([3, 1, 1, 1], 0.00001),
    ([3, 2, 2, 2], 0.00005),
    ([1, 3, 3, 3], 0.99603),
    ([2, 3, 3, 3], 1.0040),
];

#[allow(clippy::approx_constant)]
pub const EX3_START: [f64; 3] = [0.9015, 0.3183, 0.5970];
pub const EX4_START: [f64; 5] = [0.3319, 0.8397, 0.3717, 0.8282, 0.1765];
pub const EX5_START: [f64; 5] = [0.2291, 0.0922, 0.2409, 0.9025, 0.21734];
pub const EX6_START: [f64; 5] = [0.1846, 0.8337, 0.1696, 0.9532, 0.7225];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum ProblemSpec {
    Ex1,
    Ex2 {
        n: usize,
    },
    Ex3,
    Ex4 {
        n: usize,
    },
    Ex5 {
        n: usize,
    },
    Ex6 {
        n: usize,
    },
    #[serde(rename = "rand")]
    RandomSym {
        n: usize,
        m: usize,
        seed: u64,
    },
}

impl ProblemSpec {
    pub fn b_kind(&self) -> BKind {
        match self {
            ProblemSpec::Ex1 | ProblemSpec::Ex2 { .. } | ProblemSpec::Ex3 => BKind::Z,
            ProblemSpec::RandomSym { .. } => BKind::Z,
            ProblemSpec::Ex4 { .. } | ProblemSpec::Ex5 { .. } | ProblemSpec::Ex6 { .. } => BKind::H,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ProblemSpec::Ex1 | ProblemSpec::Ex3 => 3,
            ProblemSpec::Ex2 { n }
            | ProblemSpec::Ex4 { n }
            | ProblemSpec::Ex5 { n }
            | ProblemSpec::Ex6 { n }
            | ProblemSpec::RandomSym { n, .. } => n,
        }
    }

    /// Documented starting point: the fixed starts of `ex3` to `ex6` (at `n = 5`),
    /// the all-ones vector otherwise.
    pub fn default_start(&self) -> DVector<f64> {
        let fixed: Option<&[f64]> = match *self {
            ProblemSpec::Ex3 => Some(&EX3_START),
            ProblemSpec::Ex4 { n: 5 } => Some(&EX4_START),
            ProblemSpec::Ex5 { n: 5 } => Some(&EX5_START),
            ProblemSpec::Ex6 { n: 5 } => Some(&EX6_START),
            _ => None,
        };
        match fixed {
            Some(v) => DVector::from_column_slice(v),
            None => DVector::from_element(self.dim(), 1.0),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Ex1 => write!(f, "ex1"),
            ProblemSpec::Ex2 { n } => write!(f, "ex2:n={n}"),
            ProblemSpec::Ex3 => write!(f, "ex3"),
            ProblemSpec::Ex4 { n } => write!(f, "ex4:n={n}"),
            ProblemSpec::Ex5 { n } => write!(f, "ex5:n={n}"),
            ProblemSpec::Ex6 { n } => write!(f, "ex6:n={n}"),
            ProblemSpec::RandomSym { n, m, seed } => write!(f, "rand:n={n},m={m},seed={seed}"),
        }
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    /// Parses `ex1`, `ex2:n=5`, `ex3`, `ex4:n=5`, `ex5:n=5`, `ex6:n=5` or
    /// `rand:n=4,m=4,seed=7`. Missing `n` defaults to 5; `rand` defaults to
    /// `n=4,m=4,seed=0`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut n = None;
        let mut m = None;
        let mut seed = None;
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Problem(format!("expected key=value, got '{kv}'")))?;
            let bad = |_| Error::Problem(format!("invalid value for {k}: '{v}'"));
            match k.trim() {
                "n" => n = Some(v.trim().parse::<usize>().map_err(bad)?),
                "m" => m = Some(v.trim().parse::<usize>().map_err(bad)?),
                "seed" => seed = Some(v.trim().parse::<u64>().map_err(bad)?),
                other => return Err(Error::Problem(format!("unknown parameter '{other}'"))),
            }
        }
        let fixed = |spec: ProblemSpec| {
            if n.is_some_and(|n| n != 3) || m.is_some() || seed.is_some() {
                Err(Error::Problem(format!(
                    "{name} takes no parameters (n is fixed at 3)"
                )))
            } else {
                Ok(spec)
            }
        };
        let sized = |make: fn(usize) -> ProblemSpec| {
            if m.is_some() || seed.is_some() {
                return Err(Error::Problem(format!("{name} only takes n")));
            }
            Ok(make(n.unwrap_or(5)))
        };
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "ex1" => fixed(ProblemSpec::Ex1)?,
            "ex3" => fixed(ProblemSpec::Ex3)?,
            "ex2" => sized(|n| ProblemSpec::Ex2 { n })?,
            "ex4" => sized(|n| ProblemSpec::Ex4 { n })?,
            "ex5" => sized(|n| ProblemSpec::Ex5 { n })?,
            "ex6" => sized(|n| ProblemSpec::Ex6 { n })?,
            "rand" => ProblemSpec::RandomSym {
                n: n.unwrap_or(4),
                m: m.unwrap_or(4),
                seed: seed.unwrap_or(0),
            },
            other => return Err(Error::Problem(format!("unknown problem '{other}'"))),
        };
        if spec.dim() == 0 {
            return Err(Error::Problem("n must be positive".into()));
        }
        Ok(spec)
    }
}

/// A tensor pair `(A, B)`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub a: DenseSymmetricTensor,
    pub b: Operator,
}

pub fn build(spec: &ProblemSpec) -> Result<Problem> {
    let n = spec.dim();
    if n == 0 {
        return Err(Error::Problem("n must be positive".into()));
    }
    let a = match *spec {
        ProblemSpec::Ex1 => {
            let mut raw = DenseTensor::zeros(4, 3)?;
            for (idx, val) in EX1_CLASSES {
                raw.set_all_permutations(&idx.map(|i| i - 1), val)?;
            }
            DenseSymmetricTensor::try_from_dense(raw, 0.0)?
        }
        ProblemSpec::Ex2 { n } => {
            let diag: Vec<f64> = (1..=n).map(|i| (i as f64 - 1.0) / i as f64).collect();
            DenseSymmetricTensor::diagonal(4, &diag)?
        }
        ProblemSpec::Ex3 => {
            let mut raw = DenseTensor::zeros(4, 3)?;
            for (idx, val) in EX3_POSITIONS {
                raw.set(&idx.map(|i| i - 1), val)?;
            }
            symmetrize(&raw)
        }
        ProblemSpec::Ex4 { n } => DenseSymmetricTensor::from_fn(4, n, |idx| {
            (idx.iter().map(|&i| i + 1).sum::<usize>() as f64).sin()
        })?,
        ProblemSpec::Ex5 { n } => DenseSymmetricTensor::from_fn(4, n, |idx| {
            idx.iter().map(|&i| ((i + 1) as f64).tan()).sum()
        })?,
        ProblemSpec::Ex6 { n } => DenseSymmetricTensor::from_fn(4, n, |idx| {
            idx.iter()
                .map(|&i| {
                    let k = i + 1;
                    if k % 2 == 0 {
                        1.0 / k as f64
                    } else {
                        -1.0 / k as f64
                    }
                })
                .sum()
        })?,
        ProblemSpec::RandomSym { n, m, seed } => random_symmetric(n, m, seed)?,
    };
    let b = spec.b_kind().operator(a.order(), n)?;
    Ok(Problem { spec: *spec, a, b })
}

/// Entries uniform on `[-1, 1]`, then permutation-averaged. Deterministic in `seed`.
pub fn random_symmetric(n: usize, m: usize, seed: u64) -> Result<DenseSymmetricTensor> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::OddOrder(m));
    }
    let mut raw = DenseTensor::zeros(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..raw.entries().len())
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    raw = DenseTensor::from_entries(m, n, entries)?;
    Ok(symmetrize(&raw))
}

/// Entries uniform on `[0, 1)`, not normalized. Deterministic in `seed`.
pub fn random_start(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.random::<f64>())
}
