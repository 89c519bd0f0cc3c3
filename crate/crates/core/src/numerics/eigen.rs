use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// One eigenvector per row, unit norm, sign-normalised so the first
    /// coordinate with magnitude above `1e-12` is positive.
    pub eigenvectors: Array2<f64>,
}

impl SymmetricEigen {
    /// True when two consecutive eigenvalues among the first `n` are closer
    /// than `1e-10` (scaled by the largest eigenvalue when that exceeds 1).
    pub fn near_degenerate(&self, n: usize) -> bool {
        let n = n.min(self.eigenvalues.len());
        let scale = self.eigenvalues.first().map_or(1.0, |l| l.abs().max(1.0));
        self.eigenvalues[..n]
            .windows(2)
            .any(|w| (w[0] - w[1]).abs() < 1e-10 * scale)
    }
}

pub(crate) fn normalize_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Symmetric eigensolver (nalgebra's Householder + implicit QR).
///
/// Ties in eigenvalue keep the solver's order. Eigenvalues of a PSD input
/// that come out slightly negative from rounding are clamped to zero by callers.
pub fn symmetric_eigen(mat: ArrayView2<'_, f64>) -> Result<SymmetricEigen> {
    let n = mat.nrows();
    if n == 0 || mat.ncols() != n {
        return Err(Error::Argument(format!(
            "expected a non-empty square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| mat[[i, j]]);
    let eig = nalgebra::SymmetricEigen::new(dm);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigensolver produced non-finite eigenvalues".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvectors = Array2::zeros((n, n));
    let mut eigenvalues = Vec::with_capacity(n);
    for (row, &idx) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[idx]);
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        normalize_sign(&mut v);
        eigenvectors
            .row_mut(row)
            .iter_mut()
            .zip(v)
            .for_each(|(dst, src)| *dst = src);
    }
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}
