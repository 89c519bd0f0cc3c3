use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::rng;
use super::squared_distance;
use crate::error::{Error, Result};

/// Lloyd's algorithm settings. Defaults: 300 iterations, tolerance `1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no centroid moves further than this (Euclidean).
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// `k × d`
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after each Lloyd iteration; non-increasing.
    pub inertia_trace: Vec<f64>,
}

impl KMeansResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.nrows()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Nearest centroid for every row; equidistant rows go to the lowest index.
/// Returns the assignments and their squared distances.
pub fn assign_nearest(
    data: ArrayView2<'_, f64>,
    centroids: ArrayView2<'_, f64>,
) -> (Vec<usize>, Vec<f64>) {
    let mut labels = Vec::with_capacity(data.nrows());
    let mut dists = Vec::with_capacity(data.nrows());
    for row in data.rows() {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.rows().into_iter().enumerate() {
            let d = squared_distance(row, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels.push(best.0);
        dists.push(best.1);
    }
    (labels, dists)
}

fn plus_plus_init(data: ArrayView2<'_, f64>, k: usize, seed: u64) -> Array2<f64> {
    let m = data.nrows();
    let mut rng = rng(seed);
    let mut chosen = vec![rng.random_range(0..m)];
    let mut d2: Vec<f64> = data
        .rows()
        .into_iter()
        .map(|r| squared_distance(r, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a chosen centre
            (0..m).find(|i| !chosen.contains(i)).expect("k <= M")
        };
        chosen.push(next);
        for (i, row) in data.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(row, data.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, data.ncols()));
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).assign(&data.row(i));
    }
    centroids
}

/// Moves the farthest point (from a cluster with at least two members) into
/// each empty cluster.
fn reseed_empty(
    data: ArrayView2<'_, f64>,
    labels: &mut [usize],
    dists: &mut [f64],
    centroids: &mut Array2<f64>,
) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut best: Option<usize> = None;
        for i in 0..labels.len() {
            if sizes[labels[i]] > 1 && best.is_none_or(|b| dists[i] > dists[b]) {
                best = Some(i);
            }
        }
        let i = best.expect("k <= M guarantees a donor cluster");
        sizes[labels[i]] -= 1;
        sizes[c] = 1;
        labels[i] = c;
        dists[i] = 0.0;
        centroids.row_mut(c).assign(&data.row(i));
    }
}

fn cluster_means(data: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, data.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &l) in data.rows().into_iter().zip(labels) {
        let mut s = sums.row_mut(l);
        s += &row;
        counts[l] += 1;
    }
    for (mut s, &n) in sums.axis_iter_mut(Axis(0)).zip(&counts) {
        s /= n as f64;
    }
    sums
}

fn inertia(data: ArrayView2<'_, f64>, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    data.rows()
        .into_iter()
        .zip(labels)
        .map(|(r, &l)| squared_distance(r, centroids.row(l)))
        .sum()
}

/// Lloyd's k-means with k-means++ seeding.
///
/// Iterates until the assignment is a fixed point, no centroid moves more
/// than `tol`, or `max_iter` is reached. The returned centroids are always the
/// means of the returned assignment and no cluster is empty.
pub fn kmeans(data: ArrayView2<'_, f64>, config: &KMeansConfig) -> Result<KMeansResult> {
    let (m, _) = data.dim();
    let k = config.k;
    if k == 0 || k > m {
        return Err(Error::Argument(format!("k = {k} must lie in 1..={m}")));
    }
    if config.tol.is_nan() || config.tol < 0.0 {
        return Err(Error::Argument(format!("tolerance {} must be >= 0", config.tol)));
    }

    let mut centroids = plus_plus_init(data, k, config.seed);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        let (mut next, mut dists) = assign_nearest(data, centroids.view());
        reseed_empty(data, &mut next, &mut dists, &mut centroids);
        let stable = next == labels;
        labels = next;
        let updated = cluster_means(data, &labels, k);
        let shift = updated
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        trace.push(inertia(data, &labels, &centroids));
        if stable || shift < config.tol {
            converged = true;
            break;
        }
    }

    if labels.is_empty() {
        // max_iter == 0: a single assignment against the seeds
        let (mut l, mut d) = assign_nearest(data, centroids.view());
        reseed_empty(data, &mut l, &mut d, &mut centroids);
        labels = l;
        centroids = cluster_means(data, &labels, k);
    }

    let total = inertia(data, &labels, &centroids);
    Ok(KMeansResult {
        centroids,
        assignments: labels,
        inertia: total,
        iterations,
        converged,
        inertia_trace: trace,
    })
}
