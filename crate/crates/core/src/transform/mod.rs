//! Cluster-based isotropy enhancement.
//!
//! The space is partitioned with k-means. Each cluster is centered on its
//! centroid and its top `d_remove` principal directions are projected out:
//!
//! ```text
//! out = (w − c) − Σⱼ uⱼᵀ(w − c) · uⱼ
//! ```
//!
//! where `c` is the centroid nearest to `w` and `uⱼ` are that cluster's
//! dominant directions. The centroid is not added back. A fitted transform can
//! be applied to the matrix it was fit on or, unchanged, to another language's
//! embeddings (zero-shot).

mod io;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::{assign_nearest, kmeans, pca, KMeansConfig};
use crate::store::EmbeddingMatrix;

pub use io::{from_json, load_transform, save_transform, to_json, TRANSFORM_FORMAT, TRANSFORM_VERSION};

pub const DEFAULT_CLUSTERS: usize = 7;
pub const DEFAULT_REMOVE: usize = 12;

/// Orthonormality tolerance for stored components.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformCluster {
    pub centroid: Array1<f64>,
    /// `d_remove × d`, orthonormal rows.
    pub components: Array2<f64>,
    /// Number of source rows in the cluster at fit time.
    pub size: usize,
}

/// Where and how a transform was fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProvenance {
    pub source_language: String,
    pub source_model_id: String,
    pub source_rows: usize,
    pub kmeans: KMeansConfig,
    pub kmeans_init: String,
    pub kmeans_iterations: usize,
    pub kmeans_converged: bool,
    /// How the transform treats a different target space.
    pub target_policy: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyTransform {
    pub k: usize,
    pub d: usize,
    pub d_remove: usize,
    pub clusters: Vec<TransformCluster>,
    pub provenance: FitProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub k: usize,
    pub d_remove: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        let km = KMeansConfig::new(DEFAULT_CLUSTERS, 0);
        FitOptions {
            k: DEFAULT_CLUSTERS,
            d_remove: DEFAULT_REMOVE,
            seed: 0,
            max_iter: km.max_iter,
            tol: km.tol,
        }
    }
}

impl FitOptions {
    pub fn new(k: usize, d_remove: usize, seed: u64) -> Self {
        FitOptions {
            k,
            d_remove,
            seed,
            ..Default::default()
        }
    }

    /// Checks what can be checked without data of a given shape.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("cluster count must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Argument(format!("tolerance {} must be >= 0", self.tol)));
        }
        Ok(())
    }
}

pub(crate) fn check_orthonormal(components: ArrayView2<'_, f64>, tol: f64) -> std::result::Result<(), String> {
    let gram = components.dot(&components.t());
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (gram[[i, j]] - expected).abs() > tol {
                return Err(format!(
                    "components {i} and {j} have inner product {} (expected {expected})",
                    gram[[i, j]]
                ));
            }
        }
    }
    Ok(())
}

/// Fits k-means on `m`, then the top `d_remove` principal directions of each
/// cluster around its centroid.
pub fn fit(m: &EmbeddingMatrix, opts: &FitOptions) -> Result<IsotropyTransform> {
    opts.validate()?;
    let d = m.dims();
    if opts.d_remove > d {
        return Err(Error::Argument(format!(
            "cannot remove {} directions from a {d}-dimensional space",
            opts.d_remove
        )));
    }
    if opts.k > m.rows() {
        return Err(Error::Argument(format!(
            "{} clusters requested for {} rows",
            opts.k,
            m.rows()
        )));
    }
    let config = KMeansConfig {
        k: opts.k,
        seed: opts.seed,
        max_iter: opts.max_iter,
        tol: opts.tol,
    };
    let km = kmeans(m.data(), &config)?;
    let sizes = km.cluster_sizes();
    if let Some((c, &n)) = sizes.iter().enumerate().find(|(_, &n)| n < opts.d_remove + 1) {
        return Err(Error::Fit(format!(
            "cluster {c} has {n} members but removing {} directions needs at least {}; \
             use a smaller --remove or fewer --clusters",
            opts.d_remove,
            opts.d_remove + 1
        )));
    }

    let mut clusters = Vec::with_capacity(opts.k);
    for (c, centroid) in km.centroids.rows().into_iter().enumerate() {
        let members: Vec<usize> = (0..m.rows()).filter(|&i| km.assignments[i] == c).collect();
        let centered = m.data().select(Axis(0), &members) - centroid.insert_axis(Axis(0));
        let basis = pca(centered.view(), false, opts.d_remove)?;
        clusters.push(TransformCluster {
            centroid: centroid.to_owned(),
            components: basis.components,
            size: members.len(),
        });
    }

    Ok(IsotropyTransform {
        k: opts.k,
        d,
        d_remove: opts.d_remove,
        clusters,
        provenance: FitProvenance {
            source_language: m.language.clone(),
            source_model_id: m.model_id.clone(),
            source_rows: m.rows(),
            kmeans: config,
            kmeans_init: "k-means++".into(),
            kmeans_iterations: km.iterations,
            kmeans_converged: km.converged,
            target_policy: "source centroids and components reused unchanged".into(),
        },
    })
}

/// Output of [`IsotropyTransform::apply_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub matrix: EmbeddingMatrix,
    /// Cluster each row was assigned to.
    pub assignments: Vec<usize>,
}

impl IsotropyTransform {
    pub fn centroids(&self) -> Array2<f64> {
        let mut c = Array2::zeros((self.k, self.d));
        for (mut row, cl) in c.rows_mut().into_iter().zip(&self.clusters) {
            row.assign(&cl.centroid);
        }
        c
    }

    /// Nearest source centroid per row; ties go to the lower cluster index.
    pub fn assign(&self, data: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.check_dims(data.ncols())?;
        Ok(assign_nearest(data, self.centroids().view()).0)
    }

    fn check_dims(&self, d: usize) -> Result<()> {
        if d != self.d {
            return Err(Error::Argument(format!(
                "transform expects {}-dimensional rows, got {d}",
                self.d
            )));
        }
        Ok(())
    }

    /// Transforms raw rows, returning the new rows and their assignments.
    pub fn apply_rows(&self, data: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Vec<usize>)> {
        let assignments = self.assign(data)?;
        let mut out = Array2::zeros(data.raw_dim());
        for (c, cl) in self.clusters.iter().enumerate() {
            let members: Vec<usize> = (0..data.nrows()).filter(|&i| assignments[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let centered = data.select(Axis(0), &members) - cl.centroid.view().insert_axis(Axis(0));
            let coeffs = centered.dot(&cl.components.t());
            let cleaned = &centered - &coeffs.dot(&cl.components);
            for (row, &i) in cleaned.rows().into_iter().zip(&members) {
                out.row_mut(i).assign(&row);
            }
        }
        Ok((out, assignments))
    }

    pub fn apply_detailed(&self, m: &EmbeddingMatrix) -> Result<Applied> {
        let (data, assignments) = self.apply_rows(m.data())?;
        let mut matrix = m.with_data(data)?;
        matrix.provenance.insert(
            "isotropy_transform".into(),
            serde_json::json!({
                "source_language": self.provenance.source_language,
                "source_model_id": self.provenance.source_model_id,
                "k": self.k,
                "d_remove": self.d_remove,
                "seed": self.provenance.kmeans.seed,
                "zero_shot": self.provenance.source_language != m.language,
            }),
        );
        Ok(Applied {
            matrix,
            assignments,
        })
    }

    /// Applies the transform; metadata and tags are kept, provenance gains an
    /// `isotropy_transform` entry.
    pub fn apply(&self, m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
        Ok(self.apply_detailed(m)?.matrix)
    }

    /// Short identity for reports.
    pub fn identity(&self) -> Value {
        serde_json::json!({
            "source_language": self.provenance.source_language,
            "source_model_id": self.provenance.source_model_id,
            "k": self.k,
            "d": self.d,
            "d_remove": self.d_remove,
            "seed": self.provenance.kmeans.seed,
            "kmeans_max_iter": self.provenance.kmeans.max_iter,
            "kmeans_tol": self.provenance.kmeans.tol,
            "target_policy": self.provenance.target_policy,
        })
    }
}
