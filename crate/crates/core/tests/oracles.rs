#![allow(clippy::needless_range_loop)]

mod common;

use cwr_geometry::metrics::{detect_outliers, isotropy_cos, isotropy_pc, outliers_from_mean};
use cwr_geometry::numerics::{kmeans, pca, rng, sample_pairs, spearman, symmetric_eigen, KMeansConfig};
use cwr_geometry::sts::{evaluate, pool_sentence, score_pairs, Setting};
use cwr_geometry::synth::{self, AnisotropicSpec, IsotropicSpec, OutlierSpec, StsSpec};
use cwr_geometry::transform::{fit, from_json, load_transform, save_transform, to_json, FitOptions};
use cwr_geometry::EmbeddingMatrix;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let d = rows[0].len();
    Array2::from_shape_vec((rows.len(), d), rows.iter().flatten().copied().collect()).unwrap()
}

fn flip_to_first_positive(v: &mut [f64]) {
    if let Some(&f) = v.iter().find(|x| x.abs() > 1e-12) {
        if f < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Random orthogonal matrix by Gram-Schmidt on seeded rows.
fn orthogonal(d: usize, seed: u64) -> Array2<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for mut v in common::lcg_rows(d, d, seed) {
        for u in &q {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        q.push(v);
    }
    to_array(&q)
}

#[test]
fn pca_matches_jacobi_oracle() {
    for seed in 0..10u64 {
        let rows: Vec<Vec<f64>> = common::lcg_rows(40, 6, seed)
            .into_iter()
            .map(|r| r.iter().enumerate().map(|(j, x)| x * (1.0 + j as f64)).collect())
            .collect();
        for center in [true, false] {
            let (mean, cov) = common::covariance(&rows, center);
            let (vals, vecs) = common::jacobi_eigen(&cov);
            let p = pca(to_array(&rows).view(), center, 6).unwrap();
            for j in 0..6 {
                assert!((p.mean[j] - mean[j]).abs() < 1e-12);
            }
            for (i, (got, want)) in p.eigenvalues.iter().zip(&vals).enumerate() {
                assert!((got - want).abs() < 1e-8, "seed {seed} eigenvalue {i}: {got} vs {want}");
            }
            assert!(!p.near_degenerate);
            for (i, want) in vecs.iter().enumerate() {
                let mut want = want.clone();
                flip_to_first_positive(&mut want);
                for j in 0..6 {
                    assert!((p.components[[i, j]] - want[j]).abs() < 1e-8, "seed {seed} vector {i}");
                }
            }
        }
    }
}

#[test]
fn symmetric_eigen_matches_jacobi_on_gram_matrix() {
    let rows = common::lcg_rows(25, 5, 42);
    let a = to_array(&rows);
    let gram = a.t().dot(&a);
    let g: Vec<Vec<f64>> = gram.rows().into_iter().map(|r| r.to_vec()).collect();
    let (vals, _) = common::jacobi_eigen(&g);
    let e = symmetric_eigen(gram.view()).unwrap();
    for (got, want) in e.eigenvalues.iter().zip(&vals) {
        assert!((got - want).abs() < 1e-8 * want.abs().max(1.0));
    }
}

/// Fixtures of at most 8 points with clearly separated groups, where Lloyd
/// from k-means++ reaches the global optimum.
fn separated_fixture(seed: u64, n: usize, k: usize) -> Vec<Vec<f64>> {
    let jitter = common::lcg_rows(n, 2, seed);
    (0..n)
        .map(|i| {
            let c = i % k;
            let centre = [10.0 * c as f64, 7.0 * (c % 2) as f64];
            vec![centre[0] + 0.5 * jitter[i][0], centre[1] + 0.5 * jitter[i][1]]
        })
        .collect()
}

#[test]
fn kmeans_reaches_enumerated_optimum() {
    for seed in 0..15u64 {
        for (n, k) in [(4, 2), (6, 2), (6, 3), (7, 3), (8, 2), (8, 3), (8, 4)] {
            let pts = separated_fixture(seed, n, k);
            let (best, _) = common::best_partition(&pts, k);
            let r = kmeans(to_array(&pts).view(), &KMeansConfig::new(k, seed)).unwrap();
            let got = common::sse(&pts, &r.assignments, k);
            assert!((got - best).abs() < 1e-9 * best.max(1.0), "seed {seed} n {n} k {k}: {got} vs {best}");
            assert!((r.inertia - best).abs() < 1e-9 * best.max(1.0));
        }
    }
}

#[test]
fn kmeans_never_beats_enumeration() {
    for seed in 0..20u64 {
        let pts = common::lcg_rows(7, 2, seed);
        let (best, _) = common::best_partition(&pts, 3);
        let r = kmeans(to_array(&pts).view(), &KMeansConfig::new(3, seed)).unwrap();
        assert!(r.inertia >= best - 1e-12);
    }
}

#[test]
fn spearman_matches_rank_oracle_with_ties() {
    let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (vec![1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0], vec![0.3, 0.1, 0.4, 0.4, 0.9, 0.2, 0.7]),
        (vec![4.0, 4.0, 4.0, 1.0], vec![1.0, 2.0, 3.0, 4.0]),
        (vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0], vec![3.0, 3.0, 2.0, 1.0, 2.0, 9.0]),
    ];
    for (a, b) in &cases {
        let got = spearman(a, b).unwrap();
        let want = common::spearman_oracle(a, b);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let mut r = rng(5);
    for _ in 0..50 {
        let n = r.random_range(3..30);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64 * 0.5).collect();
        if let Ok(got) = spearman(&a, &b) {
            assert!((got - common::spearman_oracle(&a, &b)).abs() < 1e-12);
        }
    }
}

#[test]
fn sample_pairs_indices_are_uniform() {
    let pairs = sample_pairs(1000, 1000, 11).unwrap();
    assert!(pairs.iter().all(|&(i, j)| i != j && i < 1000 && j < 1000));
    // 50 bins of 20 indices, 2000 draws: expected 40 per bin
    let mut bins = [0f64; 50];
    for &(i, j) in &pairs {
        bins[i / 20] += 1.0;
        bins[j / 20] += 1.0;
    }
    let chi2: f64 = bins.iter().map(|o| (o - 40.0).powi(2) / 40.0).sum();
    // chi-square, 49 degrees of freedom, 0.999 quantile
    assert!(chi2 < 85.35, "chi2 = {chi2}");
}

#[test]
fn isotropy_cos_matches_loop_oracle() {
    let rows = common::lcg_rows(60, 5, 8);
    let m = EmbeddingMatrix::from_rows(&rows).unwrap();
    let pairs = sample_pairs(60, 500, 3).unwrap();
    let want = common::mean_cosine(&rows, &pairs);
    assert!((isotropy_cos(&m, 500, 3).unwrap() - want).abs() < 1e-12);
}

#[test]
fn isotropy_pc_orders_isotropic_above_shifted() {
    let iso = synth::isotropic(&IsotropicSpec { rows: 10_000, dims: 32, seed: 4, ..Default::default() });
    let shift = 10.0 / (32f64).sqrt();
    let shifted = iso.with_data(iso.data().mapv(|x| x + shift)).unwrap();
    let a = isotropy_pc(&iso).unwrap();
    let b = isotropy_pc(&shifted).unwrap();
    assert!(a.log_value > b.log_value, "{} vs {}", a.log_value, b.log_value);
    assert!(a.value <= 1.0 && b.value >= 0.0);
}

#[test]
fn cosine_is_rotation_invariant_but_outliers_are_not() {
    let planted = synth::planted_outliers(&OutlierSpec {
        rows: 2000,
        dims: 64,
        seed: 2,
        outlier_dims: vec![9],
        ..Default::default()
    });
    let q = orthogonal(64, 77);
    let rotated = planted.with_data(planted.data().dot(&q)).unwrap();
    let a = isotropy_cos(&planted, 1000, 1).unwrap();
    let b = isotropy_cos(&rotated, 1000, 1).unwrap();
    assert!((a - b).abs() < 1e-9);
    let before = detect_outliers(&planted, 2000, 0, 3.0).unwrap();
    let after = detect_outliers(&rotated, 2000, 0, 3.0).unwrap();
    assert_eq!(before.outliers, vec![9]);
    assert_ne!(before.outliers, after.outliers);
}

#[test]
fn normal_mean_representation_has_few_flags() {
    let mut r = rng(31);
    let values: Vec<f64> = (0..768).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let scan = outliers_from_mean(&values, 3.0);
    assert!(scan.outliers.len() <= 8, "{} flags", scan.outliers.len());
    let m = EmbeddingMatrix::from_data(Array2::from_shape_vec((1, 768), values).unwrap()).unwrap();
    let rep = detect_outliers(&m, 1, 0, 3.0).unwrap();
    assert_eq!(rep.outliers, scan.outliers);
}

#[test]
fn two_blobs_recover_centroids() {
    let mut r = rng(12);
    let centres = [[-5.0, 0.0, 2.0], [5.0, 1.0, -2.0]];
    let data = Array2::from_shape_fn((1000, 3), |(i, j)| centres[i % 2][j] + 0.5 * r.sample::<f64, _>(StandardNormal));
    let m = EmbeddingMatrix::from_data(data).unwrap();
    let t = fit(&m, &FitOptions::new(2, 1, 0)).unwrap();
    let mut found = t.centroids().rows().into_iter().map(|c| c.to_vec()).collect::<Vec<_>>();
    found.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for (f, c) in found.iter().zip(&centres) {
        for j in 0..3 {
            assert!((f[j] - c[j]).abs() < 0.1, "{f:?} vs {c:?}");
        }
    }
}

#[test]
fn transform_round_trip_at_full_scale() {
    let (m, _) = synth::anisotropic(&AnisotropicSpec { rows: 1400, dims: 768, ..Default::default() });
    let t = fit(&m, &FitOptions::new(7, 12, 0)).unwrap();
    assert_eq!(t.clusters.len(), 7);
    assert_eq!(t.clusters[0].components.dim(), (12, 768));
    let back = from_json(&to_json(&t).unwrap()).unwrap();
    assert_eq!(back, t);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    save_transform(&t, &path).unwrap();
    let loaded = load_transform(&path).unwrap();
    assert_eq!(loaded.apply(&m).unwrap(), t.apply(&m).unwrap());
}

#[test]
fn fit_is_deterministic() {
    let (m, _) = synth::anisotropic(&AnisotropicSpec { rows: 800, dims: 32, ..Default::default() });
    let a = fit(&m, &FitOptions::new(3, 4, 9)).unwrap();
    let b = fit(&m, &FitOptions::new(3, 4, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.apply(&m).unwrap(), b.apply(&m).unwrap());
}

#[test]
fn pooling_matches_loop_oracle() {
    let (m, ds) = synth::sts_benchmark(&StsSpec { pairs: 10, dims: 8, seed: 2, ..Default::default() });
    for p in ds.pairs() {
        let pooled = pool_sentence(&m, p.first.clone()).unwrap();
        for j in 0..8 {
            let want = p.first.clone().map(|i| m.data()[[i, j]]).sum::<f64>() / p.first.len() as f64;
            assert!((pooled[j] - want).abs() < 1e-12);
        }
    }
    let scores = score_pairs(&m, &ds).unwrap();
    let rows: Vec<Vec<f64>> = ds
        .pairs()
        .iter()
        .flat_map(|p| [pool_sentence(&m, p.first.clone()).unwrap().to_vec(), pool_sentence(&m, p.second.clone()).unwrap().to_vec()])
        .collect();
    for (i, s) in scores.iter().enumerate() {
        assert!((s - common::mean_cosine(&rows, &[(2 * i, 2 * i + 1)])).abs() < 1e-12);
    }
}

#[test]
fn centering_only_transform_keeps_scores_on_centered_data() {
    let (m, ds) = synth::sts_benchmark(&StsSpec { pairs: 120, dims: 16, seed: 6, center: true, ..Default::default() });
    let t = fit(&m, &FitOptions::new(1, 0, 0)).unwrap();
    let base = evaluate(&m, &ds, None, Setting::Baseline).unwrap();
    let ind = evaluate(&m, &ds, Some(&t), Setting::Individual).unwrap();
    assert_eq!(base.spearman_pct, ind.spearman_pct);
}

#[test]
fn transform_before_pooling_differs_from_after() {
    let (m, ds) = synth::sts_benchmark(&StsSpec { pairs: 100, dims: 32, seed: 1, ..Default::default() });
    let t = fit(&m, &FitOptions::new(3, 4, 0)).unwrap();
    let token_level = score_pairs(&t.apply(&m).unwrap(), &ds).unwrap();

    let mut pooled = Vec::new();
    for p in ds.pairs() {
        pooled.push(pool_sentence(&m, p.first.clone()).unwrap().to_vec());
        pooled.push(pool_sentence(&m, p.second.clone()).unwrap().to_vec());
    }
    let (pooled_then, _) = t.apply_rows(to_array(&pooled).view()).unwrap();
    let rows: Vec<Vec<f64>> = pooled_then.rows().into_iter().map(|r| r.to_vec()).collect();
    let sentence_level: Vec<f64> = (0..ds.len()).map(|i| common::mean_cosine(&rows, &[(2 * i, 2 * i + 1)])).collect();
    let max_diff = token_level.iter().zip(&sentence_level).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(max_diff > 1e-3, "max diff {max_diff}");
}


#[test]
fn evaluate_leaves_input_untouched() {
    let (m, ds) = synth::sts_benchmark(&StsSpec { pairs: 40, dims: 16, seed: 3, ..Default::default() });
    let copy = m.clone();
    let t = fit(&m, &FitOptions::new(2, 2, 0)).unwrap();
    evaluate(&m, &ds, Some(&t), Setting::Individual).unwrap();
    assert_eq!(m, copy);
}
