#![allow(clippy::needless_range_loop)]

//! Independent reference implementations used only by tests.
#![allow(dead_code)]

/// Cyclic Jacobi eigensolver for a small dense symmetric matrix.
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors (one per entry), sign-normalised so the first coordinate with
/// magnitude above 1e-12 is positive.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][j]).collect();
            if let Some(&f) = col.iter().find(|x| x.abs() > 1e-12) {
                if f < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (a[j][j], col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs.into_iter().unzip()
}

/// Population covariance (or uncentered second moment) computed by loops.
pub fn covariance(rows: &[Vec<f64>], center: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = rows.len() as f64;
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    if center {
        for r in rows {
            for j in 0..d {
                mean[j] += r[j];
            }
        }
        mean.iter_mut().for_each(|x| *x /= m);
    }
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    c.iter_mut().flatten().for_each(|x| *x /= m);
    (mean, c)
}

/// Smallest within-cluster sum of squares over every labelling of `points`
/// into exactly `k` non-empty clusters, by enumeration.
pub fn best_partition(points: &[Vec<f64>], k: usize) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, Vec::new());
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            let sse = sse(points, &labels, k);
            if sse < best.0 {
                best = (sse, labels.clone());
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

pub fn sse(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>();
    }
    total
}

/// Rank of `x[i]` = 1 + #smaller + (#equal − 1)/2, counted directly.
pub fn counted_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let less = x.iter().filter(|&&v| v < xi).count() as f64;
            let equal = x.iter().filter(|&&v| v == xi).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn pearson_by_definition(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    cov / (va.sqrt() * vb.sqrt())
}

pub fn spearman_oracle(a: &[f64], b: &[f64]) -> f64 {
    pearson_by_definition(&counted_ranks(a), &counted_ranks(b))
}

/// `ln Σ exp(uᵀwᵢ)` summed directly, no shift. Only valid for small arguments.
pub fn direct_log_partition(u: &[f64], rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|w| w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().exp())
        .sum::<f64>()
        .ln()
}

/// Mean cosine over explicit pairs, by loops.
pub fn mean_cosine(rows: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    pairs.iter().map(|&(i, j)| cos(&rows[i], &rows[j])).sum::<f64>() / pairs.len() as f64
}

/// Seeded rows of uniform values in [-1, 1), for fixtures.
pub fn lcg_rows(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..m)
        .map(|_| {
            (0..d)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
                })
                .collect()
        })
        .collect()
}
