//! Dense order-m tensors, the two identity operators and their contraction kernels.
//!
//! Storage is a flat row-major array over index tuples with the last index
//! varying fastest. Indices are 0-based here; the JSON loader in [`io`]
//! translates from the 1-based convention used in tensor files.

pub mod io;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n^m` for which symmetry is checked exhaustively.
const EXHAUSTIVE_SYMMETRY_LIMIT: usize = 1_000_000;

/// Value `Tx^m`, vector `Tx^{m-1}` and matrix `Tx^{m-2}` of an order-m operator.
///
/// Implementations must satisfy the Euler identities `x . Tx^{m-1} = Tx^m`
/// and `x^T (Tx^{m-2}) x = Tx^m`.
pub trait TensorOperator: Send + Sync + std::fmt::Debug {
    fn order(&self) -> usize;
    fn dim(&self) -> usize;

    /// `Tx^m`.
    fn contract_m(&self, x: &DVector<f64>) -> Result<f64>;
    /// `Tx^{m-1}`.
    fn contract_m_minus_1(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
    /// `Tx^{m-2}`, a symmetric `n x n` matrix.
    fn contract_m_minus_2(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// `Tx^m`.
pub fn contract_m<T: TensorOperator + ?Sized>(t: &T, x: &DVector<f64>) -> Result<f64> {
    t.contract_m(x)
}

/// `Tx^{m-1}`.
pub fn contract_m_minus_1<T: TensorOperator + ?Sized>(
    t: &T,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    t.contract_m_minus_1(x)
}

/// `Tx^{m-2}`.
pub fn contract_m_minus_2<T: TensorOperator + ?Sized>(
    t: &T,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    t.contract_m_minus_2(x)
}

/// Number of entries `n^m`, or an error on overflow.
fn volume(order: usize, dim: usize) -> Result<usize> {
    let exp = u32::try_from(order).map_err(|_| Error::InvalidShape("order too large".into()))?;
    dim.checked_pow(exp)
        .ok_or_else(|| Error::InvalidShape(format!("{dim}^{order} entries overflow")))
}

fn check_shape(order: usize, dim: usize) -> Result<usize> {
    if order < 2 {
        return Err(Error::InvalidShape(format!("order {order} < 2")));
    }
    if dim < 1 {
        return Err(Error::InvalidShape("dimension must be positive".into()));
    }
    volume(order, dim)
}

/// Writes the index tuple of `flat` into `idx` (last index fastest).
pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

pub(crate) fn flatten(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Flat offset of the sorted (canonical) representative of `flat`'s index class.
fn canonical(flat: usize, dim: usize, scratch: &mut [usize]) -> usize {
    unflatten(flat, dim, scratch);
    scratch.sort_unstable();
    flatten(scratch, dim)
}

/// Contracts the last mode of a row-major block against `x`.
fn contract_last(data: &[f64], x: &DVector<f64>) -> Vec<f64> {
    let n = x.len();
    data.chunks_exact(n)
        .map(|row| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// General dense order-m tensor with no symmetry requirement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let len = check_shape(order, dim)?;
        Ok(Self {
            order,
            dim,
            entries: vec![0.0; len],
        })
    }

    pub fn from_entries(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let len = check_shape(order, dim)?;
        if entries.len() != len {
            return Err(Error::InvalidShape(format!(
                "expected {len} entries for order {order} dimension {dim}, got {}",
                entries.len()
            )));
        }
        Ok(Self {
            order,
            dim,
            entries,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: idx.len(),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: self.dim,
            });
        }
        Ok(flatten(idx, self.dim))
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.entries[self.offset(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], val: f64) -> Result<()> {
        let at = self.offset(idx)?;
        self.entries[at] = val;
        Ok(())
    }

    /// Sets `val` at every permutation of `idx`.
    pub fn set_all_permutations(&mut self, idx: &[usize], val: f64) -> Result<()> {
        self.offset(idx)?;
        let mut key = idx.to_vec();
        key.sort_unstable();
        let mut scratch = vec![0; self.order];
        for flat in 0..self.entries.len() {
            unflatten(flat, self.dim, &mut scratch);
            scratch.sort_unstable();
            if scratch == key {
                self.entries[flat] = val;
            }
        }
        Ok(())
    }

    /// Largest gap between an entry and its canonical-class representative.
    ///
    /// Exhaustive up to `10^6` entries, strided sampling above that.
    fn symmetry_gap(&self) -> (usize, f64) {
        let len = self.entries.len();
        let stride = if len <= EXHAUSTIVE_SYMMETRY_LIMIT {
            1
        } else {
            len / EXHAUSTIVE_SYMMETRY_LIMIT + 1
        };
        let mut scratch = vec![0; self.order];
        let mut worst = (0, 0.0);
        for flat in (0..len).step_by(stride) {
            let c = canonical(flat, self.dim, &mut scratch);
            let gap = (self.entries[flat] - self.entries[c]).abs();
            if gap > worst.1 || gap.is_nan() {
                worst = (flat, gap);
            }
        }
        worst
    }
}

/// Permutation average of a raw tensor.
///
/// Each entry becomes the mean over all `m!` index permutations, which equals
/// the mean over the distinct positions of its index class.
pub fn symmetrize(raw: &DenseTensor) -> DenseSymmetricTensor {
    let n = raw.dim;
    let mut sum = vec![0.0; raw.entries.len()];
    let mut count = vec![0usize; raw.entries.len()];
    let mut scratch = vec![0; raw.order];
    let classes: Vec<usize> = (0..raw.entries.len())
        .map(|flat| canonical(flat, n, &mut scratch))
        .collect();
    for (flat, &c) in classes.iter().enumerate() {
        sum[c] += raw.entries[flat];
        count[c] += 1;
    }
    let entries = classes.iter().map(|&c| sum[c] / count[c] as f64).collect();
    DenseSymmetricTensor {
        order: raw.order,
        dim: n,
        entries,
    }
}

/// Dense order-m tensor whose entries are invariant under index permutation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseSymmetricTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl DenseSymmetricTensor {
    /// Accepts `raw` if it is symmetric to within `tol` (use 0 for exact).
    pub fn try_from_dense(raw: DenseTensor, tol: f64) -> Result<Self> {
        let (flat, gap) = raw.symmetry_gap();
        if gap > tol || gap.is_nan() {
            return Err(Error::NotSymmetric { flat, gap });
        }
        Ok(Self {
            order: raw.order,
            dim: raw.dim,
            entries: raw.entries,
        })
    }

    /// Builds a tensor by evaluating `f` once per index class.
    ///
    /// `f` always receives the nondecreasing representative, so the result is
    /// exactly symmetric even when `f` is only symmetric up to rounding.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_shape(order, dim)?;
        let mut entries = vec![0.0; len];
        let mut scratch = vec![0; order];
        for flat in 0..len {
            let c = canonical(flat, dim, &mut scratch);
            entries[flat] = if c == flat { f(&scratch) } else { entries[c] };
        }
        Ok(Self {
            order,
            dim,
            entries,
        })
    }

    /// Diagonal tensor with `a_{i...i} = diag[i]`.
    pub fn diagonal(order: usize, diag: &[f64]) -> Result<Self> {
        Self::from_fn(order, diag.len(), |idx| {
            if idx.iter().all(|&i| i == idx[0]) {
                diag[idx[0]]
            } else {
                0.0
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: idx.len(),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: self.dim,
            });
        }
        Ok(self.entries[flatten(idx, self.dim)])
    }

    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor {
            order: self.order,
            dim: self.dim,
            entries: self.entries.clone(),
        }
    }

    /// True when every entry equals its class representative exactly.
    pub fn is_symmetric(&self) -> bool {
        self.to_dense().symmetry_gap().1 == 0.0
    }

    fn contract_times(&self, x: &DVector<f64>, times: usize) -> Vec<f64> {
        let mut cur = contract_last(&self.entries, x);
        for _ in 1..times {
            cur = contract_last(&cur, x);
        }
        cur
    }
}

impl TensorOperator for DenseSymmetricTensor {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn contract_m(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.contract_times(x, self.order)[0])
    }

    fn contract_m_minus_1(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok(DVector::from_vec(self.contract_times(x, self.order - 1)))
    }

    fn contract_m_minus_2(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let n = self.dim;
        if self.order == 2 {
            return Ok(DMatrix::from_row_slice(n, n, &self.entries));
        }
        let flat = self.contract_times(x, self.order - 2);
        Ok(DMatrix::from_row_slice(n, n, &flat))
    }
}

/// Principal sub-tensor on the index set `j` (0-based), reindexed to `0..|j|`.
pub fn principal_subtensor(t: &DenseSymmetricTensor, j: &[usize]) -> Result<DenseSymmetricTensor> {
    if j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if let Some(&bad) = j.iter().find(|&&i| i >= t.dim) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: t.dim,
        });
    }
    let mut seen = j.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != j.len() {
        return Err(Error::InvalidShape("index set has duplicates".into()));
    }
    let k = j.len();
    let len = volume(t.order, k)?;
    let mut sub = vec![0; t.order];
    let mut full = vec![0; t.order];
    let entries = (0..len)
        .map(|flat| {
            unflatten(flat, k, &mut sub);
            for (f, &s) in full.iter_mut().zip(&sub) {
                *f = j[s];
            }
            t.entries[flatten(&full, t.dim)]
        })
        .collect();
    Ok(DenseSymmetricTensor {
        order: t.order,
        dim: k,
        entries,
    })
}

/// Diagonal H-identity, `(I)_{i_1...i_m} = delta_{i_1...i_m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HIdentity {
    order: usize,
    dim: usize,
}

impl HIdentity {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        check_shape(order, dim)?;
        Ok(Self { order, dim })
    }

    /// Materializes the identity as a dense diagonal tensor.
    pub fn to_dense(&self) -> DenseSymmetricTensor {
        DenseSymmetricTensor::diagonal(self.order, &vec![1.0; self.dim])
            .expect("shape validated at construction")
    }
}

impl TensorOperator for HIdentity {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn contract_m(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(x.iter().map(|v| v.powi(self.order as i32)).sum())
    }

    fn contract_m_minus_1(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok(x.map(|v| v.powi(self.order as i32 - 1)))
    }

    fn contract_m_minus_2(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(DMatrix::from_diagonal(
            &x.map(|v| v.powi(self.order as i32 - 2)),
        ))
    }
}

/// Z-identity with `ex^{m-1} = |x|^{m-2} x`, defined for even orders only.
///
/// The matrix form is fixed by `m(m-1) ex^{m-2} = hess(|x|^m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZIdentity {
    order: usize,
    dim: usize,
}

impl ZIdentity {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        check_shape(order, dim)?;
        if !order.is_multiple_of(2) {
            return Err(Error::OddOrder(order));
        }
        Ok(Self { order, dim })
    }
}

impl TensorOperator for ZIdentity {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn contract_m(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(x.norm_squared().powi(self.order as i32 / 2))
    }

    fn contract_m_minus_1(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok(x * x.norm_squared().powi(self.order as i32 / 2 - 1))
    }

    fn contract_m_minus_2(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let m = self.order as i32;
        let n = self.dim;
        let sq = x.norm_squared();
        if m == 2 {
            return Ok(DMatrix::identity(n, n));
        }
        if m > 4 && sq == 0.0 {
            return Err(Error::ZeroVector);
        }
        // |x|^{m-2} I + (m-2) |x|^{m-4} x x^T, over m-1; m-4 is even here.
        let outer_coef = if m == 4 { 1.0 } else { sq.powi(m / 2 - 2) };
        let mut h = DMatrix::identity(n, n) * sq.powi(m / 2 - 1);
        h += x * x.transpose() * ((m - 2) as f64 * outer_coef);
        Ok(h / (m - 1) as f64)
    }
}

/// Concrete operator used for the `B` side of a problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Operator {
    Dense(DenseSymmetricTensor),
    H(HIdentity),
    Z(ZIdentity),
}

impl TensorOperator for Operator {
    fn order(&self) -> usize {
        match self {
            Operator::Dense(t) => t.order(),
            Operator::H(t) => t.order(),
            Operator::Z(t) => t.order(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Operator::Dense(t) => t.dim(),
            Operator::H(t) => t.dim(),
            Operator::Z(t) => t.dim(),
        }
    }

    fn contract_m(&self, x: &DVector<f64>) -> Result<f64> {
        match self {
            Operator::Dense(t) => t.contract_m(x),
            Operator::H(t) => t.contract_m(x),
            Operator::Z(t) => t.contract_m(x),
        }
    }

    fn contract_m_minus_1(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Operator::Dense(t) => t.contract_m_minus_1(x),
            Operator::H(t) => t.contract_m_minus_1(x),
            Operator::Z(t) => t.contract_m_minus_1(x),
        }
    }

    fn contract_m_minus_2(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self {
            Operator::Dense(t) => t.contract_m_minus_2(x),
            Operator::H(t) => t.contract_m_minus_2(x),
            Operator::Z(t) => t.contract_m_minus_2(x),
        }
    }
}
