use ndarray::Array1;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::rng;
use crate::store::EmbeddingMatrix;

/// Summary of the entry distribution of one vector and the entries that stand out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierScan {
    pub dist_mean: f64,
    /// Population standard deviation over the entries.
    pub dist_sigma: f64,
    pub outliers: Vec<usize>,
    /// σ is zero (to rounding), so no entry can be called an outlier.
    pub degenerate: bool,
}

/// Flags every `i` with `|v[i] − mean| ≥ threshold·σ`.
pub fn outliers_from_mean(values: &[f64], threshold_sigmas: f64) -> OutlierScan {
    let n = values.len() as f64;
    let dist_mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - dist_mean).powi(2)).sum::<f64>() / n;
    let dist_sigma = var.sqrt();
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if dist_sigma <= 1e-12 * scale {
        return OutlierScan {
            dist_mean,
            dist_sigma,
            outliers: Vec::new(),
            degenerate: true,
        };
    }
    let cut = threshold_sigmas * dist_sigma;
    let outliers = values
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - dist_mean).abs() >= cut)
        .map(|(i, _)| i)
        .collect();
    OutlierScan {
        dist_mean,
        dist_sigma,
        outliers,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub language: String,
    pub model_id: String,
    pub n_samples: usize,
    pub seed: u64,
    pub threshold_sigmas: f64,
    /// `"without-replacement"` when `n_samples ≤ M`, otherwise `"with-replacement"`.
    pub sampling: String,
    pub dist_mean: f64,
    pub dist_sigma: f64,
    pub degenerate: bool,
    pub outliers: Vec<usize>,
    /// `(v − mean) / σ` for each outlier, same order.
    pub outlier_z: Vec<f64>,
    /// Mean of the sampled rows.
    pub mean_rep: Vec<f64>,
}

/// Averages `n_samples` random rows and scans the resulting mean
/// representation for outlier dimensions.
pub fn detect_outliers(
    m: &EmbeddingMatrix,
    n_samples: usize,
    seed: u64,
    threshold_sigmas: f64,
) -> Result<OutlierReport> {
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be positive".into()));
    }
    if !(threshold_sigmas.is_finite() && threshold_sigmas > 0.0) {
        return Err(Error::Argument(format!(
            "threshold must be a positive number of sigmas, got {threshold_sigmas}"
        )));
    }
    let mut rng = rng(seed);
    let (rows, sampling): (Vec<usize>, &str) = if n_samples <= m.rows() {
        (
            index::sample(&mut rng, m.rows(), n_samples).into_vec(),
            "without-replacement",
        )
    } else {
        (
            (0..n_samples).map(|_| rng.random_range(0..m.rows())).collect(),
            "with-replacement",
        )
    };
    let mut sum = Array1::<f64>::zeros(m.dims());
    for &i in &rows {
        sum += &m.row(i);
    }
    let mean_rep: Vec<f64> = (sum / n_samples as f64).to_vec();
    let scan = outliers_from_mean(&mean_rep, threshold_sigmas);
    let outlier_z = scan
        .outliers
        .iter()
        .map(|&i| (mean_rep[i] - scan.dist_mean) / scan.dist_sigma)
        .collect();
    Ok(OutlierReport {
        language: m.language.clone(),
        model_id: m.model_id.clone(),
        n_samples,
        seed,
        threshold_sigmas,
        sampling: sampling.into(),
        dist_mean: scan.dist_mean,
        dist_sigma: scan.dist_sigma,
        degenerate: scan.degenerate,
        outliers: scan.outliers,
        outlier_z,
        mean_rep,
    })
}
