//! Deterministic numerical kernels shared by the analyses.
//!
//! Everything here is a pure function of its inputs (and seed, where one is
//! taken). Randomness comes from `ChaCha8Rng`, so results are identical
//! across platforms.

mod eigen;
mod kmeans;
mod partition;
mod pca;
mod sampling;
mod stats;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use kmeans::{assign_nearest, kmeans, KMeansConfig, KMeansResult};
pub use partition::{log_partition, log_sum_exp};
pub use pca::{pca, PcaResult};
pub use sampling::{rng, sample_pairs};
pub use stats::{average_ranks, pearson, spearman};

use ndarray::ArrayView1;

pub fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.dot(&b)
}

pub fn norm(a: ArrayView1<'_, f64>) -> f64 {
    a.dot(&a).sqrt()
}

pub fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
