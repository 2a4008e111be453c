use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest eigenvalue of a symmetric matrix.
///
/// Rejects inputs whose asymmetry exceeds `1e-8 * max(1, max|M_ij|)`.
pub fn min_eig_sym(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidShape(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Err(Error::InvalidShape("empty matrix".into()));
    }
    let gap = (m - m.transpose()).amax();
    if !(gap <= 1e-8 * m.amax().max(1.0)) {
        return Err(Error::Asymmetric(gap));
    }
    let eig = SymmetricEigen::new(m.clone());
    Ok(eig.eigenvalues.min())
}
