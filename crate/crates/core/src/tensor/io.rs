//! JSON tensor files.
//!
//! ```json
//! { "order": 4, "dim": 3,
//!   "entries": [ { "idx": [1, 2, 2, 2], "val": 0.00401 } ],
//!   "symmetrize": true }
//! ```
//!
//! Indices are 1-based. Unlisted entries are zero. Without `"symmetrize": true`
//! the listed entries must already form a symmetric tensor.

use serde::{Deserialize, Serialize};

use super::{unflatten, DenseSymmetricTensor, DenseTensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub idx: Vec<usize>,
    pub val: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub order: usize,
    pub dim: usize,
    pub entries: Vec<TensorEntry>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub symmetrize: bool,
}

impl TensorFile {
    /// Builds the raw tensor, translating indices to 0-based.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let mut raw = DenseTensor::zeros(self.order, self.dim)?;
        let mut zero_based = vec![0; self.order];
        for e in &self.entries {
            if e.idx.len() != self.order {
                return Err(Error::Format(format!(
                    "entry {:?} has {} indices, order is {}",
                    e.idx,
                    e.idx.len(),
                    self.order
                )));
            }
            for (z, &i) in zero_based.iter_mut().zip(&e.idx) {
                if i == 0 || i > self.dim {
                    return Err(Error::Format(format!(
                        "index {i} outside 1..={} in entry {:?}",
                        self.dim, e.idx
                    )));
                }
                *z = i - 1;
            }
            raw.set(&zero_based, e.val)?;
        }
        Ok(raw)
    }

    pub fn to_symmetric(&self) -> Result<DenseSymmetricTensor> {
        let raw = self.to_dense()?;
        if self.symmetrize {
            Ok(super::symmetrize(&raw))
        } else {
            DenseSymmetricTensor::try_from_dense(raw, 0.0)
        }
    }

    /// Lists every nonzero entry of `t` with 1-based indices.
    pub fn from_tensor(t: &DenseSymmetricTensor) -> Self {
        let mut idx = vec![0; t.order()];
        let entries = t
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(flat, &val)| {
                unflatten(flat, t.dim(), &mut idx);
                TensorEntry {
                    idx: idx.iter().map(|i| i + 1).collect(),
                    val,
                }
            })
            .collect();
        Self {
            order: t.order(),
            dim: t.dim(),
            entries,
            symmetrize: false,
        }
    }
}

pub fn parse_tensor(json: &str) -> Result<DenseSymmetricTensor> {
    let file: TensorFile = serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    file.to_symmetric()
}

pub fn read_tensor(path: &std::path::Path) -> Result<DenseSymmetricTensor> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_tensor(&text)
}

pub fn tensor_to_json(t: &DenseSymmetricTensor) -> String {
    serde_json::to_string_pretty(&TensorFile::from_tensor(t)).expect("tensor file serializes")
}
