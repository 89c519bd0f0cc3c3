use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};

/// Principal directions of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Centering mean (all zeros when fit without centering).
    pub mean: Array1<f64>,
    /// `r × d`, orthonormal rows in descending eigenvalue order.
    pub components: Array2<f64>,
    /// Eigenvalues of the (population) covariance, `Xcᵀ Xc / M`.
    pub eigenvalues: Vec<f64>,
    /// The kept spectrum (plus the first dropped eigenvalue) has a gap below `1e-10`.
    pub near_degenerate: bool,
}

impl PcaResult {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Coordinates of each row of `data` in the component basis.
    pub fn project(&self, data: ArrayView2<'_, f64>) -> Array2<f64> {
        let centered = &data - &self.mean.view().insert_axis(Axis(0));
        centered.dot(&self.components.t())
    }
}

/// Top-`r` principal components of `data` (`M × d`).
///
/// The decomposition runs on the `d × d` covariance (or uncentered second
/// moment when `center` is false), never on the `M × M` Gram matrix.
pub fn pca(data: ArrayView2<'_, f64>, center: bool, r: usize) -> Result<PcaResult> {
    let (m, d) = data.dim();
    if m == 0 || d == 0 {
        return Err(Error::Argument(format!("PCA needs a non-empty matrix, got {m}x{d}")));
    }
    if r > m.min(d) {
        return Err(Error::Argument(format!(
            "requested {r} components but min(M, d) = {}",
            m.min(d)
        )));
    }
    let mean = if center {
        data.mean_axis(Axis(0)).expect("non-empty")
    } else {
        Array1::zeros(d)
    };
    let centered = &data - &mean.view().insert_axis(Axis(0));
    let cov = centered.t().dot(&centered) / m as f64;
    let eig = symmetric_eigen(cov.view())?;

    let scale = eig.eigenvalues[0].abs().max(1.0);
    let mut eigenvalues = Vec::with_capacity(r);
    for &l in &eig.eigenvalues[..r] {
        if l < -1e-10 * scale {
            return Err(Error::Numeric(format!(
                "covariance eigenvalue {l} is negative beyond rounding"
            )));
        }
        eigenvalues.push(l.max(0.0));
    }
    let components = eig.eigenvectors.slice(ndarray::s![..r, ..]).to_owned();
    Ok(PcaResult {
        mean,
        components,
        eigenvalues,
        near_degenerate: eig.near_degenerate((r + 1).min(d)),
    })
}
