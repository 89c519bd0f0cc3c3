//! Seeded synthetic embedding spaces with known structure.
//!
//! * [`isotropic`]: i.i.d. Gaussian rows, optionally shifted by a constant.
//! * [`anisotropic`]: rows built from a shared offset, cluster centres,
//!   per-cluster dominant directions, frequency-dependent scaling and
//!   optional outlier dimensions, plus Gaussian noise.
//! * [`planted_outliers`]: rows whose mean has bounded entries except at
//!   chosen dimensions.
//! * [`sts_benchmark`]: sentence pairs whose pooled cosine tracks the gold
//!   score, optionally buried under a common offset and a dominant direction.
//!
//! Generators that model "several languages" separate the structure
//! (`structure_seed`) from the sampled rows (`seed`): two draws with the same
//! structure seed share offsets, centres and directions.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::rng;
use crate::store::{EmbeddingMatrix, FrequencyTable, StsDataset, StsPair, TokenMeta};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(d, |_| scale * normal(rng))
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Array1<f64> {
    loop {
        let v = gaussian_vector(rng, d, 1.0);
        let n = v.dot(&v).sqrt();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn tagged(data: Array2<f64>, meta: Vec<TokenMeta>, language: &str) -> EmbeddingMatrix {
    EmbeddingMatrix::new(data, meta)
        .expect("generators produce finite, well-ordered data")
        .with_tags(language, "synthetic")
}

fn one_word_per_row(rows: usize, words_per_sentence: usize) -> Vec<TokenMeta> {
    (0..rows)
        .map(|i| {
            TokenMeta::new(
                format!("t{i}"),
                (i % words_per_sentence) as i64,
                (i / words_per_sentence) as i64,
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicSpec {
    pub rows: usize,
    pub dims: usize,
    pub seed: u64,
    /// Standard deviation of every coordinate.
    pub noise: f64,
    /// Constant added to every coordinate.
    pub offset: f64,
    pub language: String,
}

impl Default for IsotropicSpec {
    fn default() -> Self {
        IsotropicSpec {
            rows: 10_000,
            dims: 32,
            seed: 0,
            noise: 1.0,
            offset: 0.0,
            language: "synthetic".into(),
        }
    }
}

pub fn isotropic(spec: &IsotropicSpec) -> EmbeddingMatrix {
    let mut rng = rng(spec.seed);
    let data = Array2::from_shape_fn((spec.rows, spec.dims), |_| {
        spec.offset + spec.noise * normal(&mut rng)
    });
    tagged(data, one_word_per_row(spec.rows, 20), &spec.language)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicSpec {
    pub rows: usize,
    pub dims: usize,
    /// Seed for the sampled rows.
    pub seed: u64,
    /// Seed for offsets, centres, directions and vocabulary.
    pub structure_seed: u64,
    pub clusters: usize,
    /// Mean level of the shared offset; entries are drawn from `offset·[0.5, 1.5]`.
    pub offset: f64,
    /// Standard deviation of the cluster centres (before they are re-centred to sum to zero).
    pub cluster_spread: f64,
    pub dominant_dirs: usize,
    pub dominant_scale: f64,
    /// Rows of a word with standardized log-frequency `z` are scaled by `1 + gamma·z` (z clipped to ±2).
    pub freq_gamma: f64,
    pub vocab: usize,
    pub outlier_dims: Vec<usize>,
    /// Outlier offset entries sit this many offset-σ away from the offset mean.
    pub outlier_magnitude: f64,
    pub noise: f64,
    pub language: String,
}

impl Default for AnisotropicSpec {
    fn default() -> Self {
        AnisotropicSpec {
            rows: 5_000,
            dims: 64,
            seed: 0,
            structure_seed: 1,
            clusters: 7,
            offset: 5.0,
            cluster_spread: 3.0,
            dominant_dirs: 4,
            dominant_scale: 6.0,
            freq_gamma: 0.2,
            vocab: 2_000,
            outlier_dims: Vec::new(),
            outlier_magnitude: 10.0,
            noise: 1.0,
            language: "lang-a".into(),
        }
    }
}

struct Structure {
    offset: Array1<f64>,
    centres: Array2<f64>,
    directions: Vec<Array2<f64>>,
    rates: Vec<f64>,
    z: Vec<f64>,
}

fn structure(spec: &AnisotropicSpec) -> Structure {
    let mut rng = rng(spec.structure_seed);
    let d = spec.dims;
    let mut offset = Array1::from_shape_fn(d, |_| spec.offset * rng.random_range(0.5..1.5));
    if !spec.outlier_dims.is_empty() {
        let mean = offset.mean().unwrap_or(0.0);
        let sigma = offset.std(0.0);
        for &i in &spec.outlier_dims {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            offset[i] = mean + sign * spec.outlier_magnitude * sigma;
        }
    }
    let k = spec.clusters.max(1);
    let mut centres = Array2::from_shape_fn((k, d), |_| spec.cluster_spread * normal(&mut rng));
    let centre_mean = centres.mean_axis(Axis(0)).unwrap();
    centres -= &centre_mean.insert_axis(Axis(0));
    let directions = (0..k)
        .map(|_| {
            let mut dirs = Array2::zeros((spec.dominant_dirs, d));
            for mut row in dirs.rows_mut() {
                row.assign(&unit_vector(&mut rng, d));
            }
            dirs
        })
        .collect();
    let harmonic: f64 = (1..=spec.vocab).map(|r| 1.0 / r as f64).sum();
    let rates: Vec<f64> = (1..=spec.vocab)
        .map(|r| 1e6 / (r as f64 * harmonic))
        .collect();
    let logs: Vec<f64> = rates.iter().map(|r| r.ln()).collect();
    let lm = logs.iter().sum::<f64>() / logs.len() as f64;
    let ls = (logs.iter().map(|l| (l - lm).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
    let z = logs.iter().map(|l| ((l - lm) / ls).clamp(-2.0, 2.0)).collect();
    Structure {
        offset,
        centres,
        directions,
        rates,
        z,
    }
}

fn zipf_draw(rng: &mut ChaCha8Rng, cdf: &[f64]) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
}

/// Anisotropic synthetic space plus the frequency table of its vocabulary.
///
/// Row `i` belongs to planted cluster `i mod clusters`, so clusters are
/// equally sized and their centres average to zero.
pub fn anisotropic(spec: &AnisotropicSpec) -> (EmbeddingMatrix, FrequencyTable) {
    assert!(spec.vocab > 0 && spec.rows > 0 && spec.dims > 0);
    let st = structure(spec);
    let mut rng = rng(spec.seed);
    let k = st.centres.nrows();
    let total: f64 = st.rates.iter().sum();
    let mut acc = 0.0;
    let cdf: Vec<f64> = st
        .rates
        .iter()
        .map(|r| {
            acc += r / total;
            acc
        })
        .collect();

    let mut data = Array2::zeros((spec.rows, spec.dims));
    let mut meta = Vec::with_capacity(spec.rows);
    let (mut sentence, mut word_in_sentence) = (0i64, 0i64);
    let mut i = 0;
    while i < spec.rows {
        let id = zipf_draw(&mut rng, &cdf);
        let word = format!("word{id}");
        let pieces = if rng.random::<f64>() < 0.3 && i + 1 < spec.rows { 2 } else { 1 };
        let scale = 1.0 + spec.freq_gamma * st.z[id];
        for p in 0..pieces {
            let c = i % k;
            let mut row = data.row_mut(i);
            row.assign(&((&st.offset + &st.centres.row(c)) * scale));
            for dir in st.directions[c].rows() {
                row.scaled_add(spec.dominant_scale * normal(&mut rng), &dir);
            }
            row.mapv_inplace(|v| v + spec.noise * normal(&mut rng));
            let token = match (pieces, p) {
                (1, _) => word.clone(),
                (_, 0) => word[..3].to_string(),
                _ => format!("##{}", &word[3..]),
            };
            meta.push(TokenMeta::new(token, word_in_sentence, sentence));
            i += 1;
        }
        word_in_sentence += 1;
        if word_in_sentence == 12 {
            word_in_sentence = 0;
            sentence += 1;
        }
    }

    let mut table = FrequencyTable::new();
    for (id, &rate) in st.rates.iter().enumerate() {
        table.insert(&format!("word{id}"), rate).expect("positive rate");
    }
    (tagged(data, meta, &spec.language), table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSpec {
    pub rows: usize,
    pub dims: usize,
    pub seed: u64,
    /// Population σ of the non-outlier entries of the underlying mean vector.
    pub base_sigma: f64,
    pub outlier_dims: Vec<usize>,
    /// Planted entries are `±magnitude·base_sigma`.
    pub magnitude: f64,
    pub noise: f64,
}

impl Default for OutlierSpec {
    fn default() -> Self {
        OutlierSpec {
            rows: 10_000,
            dims: 768,
            seed: 0,
            base_sigma: 1.0,
            outlier_dims: Vec::new(),
            magnitude: 10.0,
            noise: 1.0,
        }
    }
}

/// Rows `b + ε` where the non-planted entries of `b` are uniform, standardized
/// to mean 0 and σ = `base_sigma` (so they stay within about `√3·σ`),
/// and planted entries are `±magnitude·base_sigma`.
pub fn planted_outliers(spec: &OutlierSpec) -> EmbeddingMatrix {
    let mut rng = rng(spec.seed);
    let d = spec.dims;
    let mut base = Array1::from_shape_fn(d, |_| rng.random_range(-1.0..1.0));
    let clean: Vec<usize> = (0..d).filter(|i| !spec.outlier_dims.contains(i)).collect();
    if clean.len() > 1 {
        let n = clean.len() as f64;
        let mean = clean.iter().map(|&i| base[i]).sum::<f64>() / n;
        let sd = (clean.iter().map(|&i| (base[i] - mean).powi(2)).sum::<f64>() / n).sqrt();
        for &i in &clean {
            base[i] = (base[i] - mean) / sd * spec.base_sigma;
        }
    }
    for &i in &spec.outlier_dims {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        base[i] = sign * spec.magnitude * spec.base_sigma;
    }
    let data = Array2::from_shape_fn((spec.rows, d), |(_, j)| base[j] + spec.noise * normal(&mut rng));
    tagged(data, one_word_per_row(spec.rows, 20), "synthetic")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsSpec {
    pub pairs: usize,
    pub dims: usize,
    pub seed: u64,
    pub tokens_min: usize,
    pub tokens_max: usize,
    /// Norm of each sentence's semantic vector.
    pub semantic_norm: f64,
    /// Per-coordinate σ of token deviations (they average to zero within a sentence).
    pub token_noise: f64,
    /// Norm of the offset shared by every token.
    pub offset: f64,
    /// σ of each token's coefficient on the shared dominant direction.
    pub dominant_scale: f64,
    /// Subtract the column mean of the final token matrix.
    pub center: bool,
    pub language: String,
}

impl Default for StsSpec {
    fn default() -> Self {
        StsSpec {
            pairs: 200,
            dims: 64,
            seed: 0,
            tokens_min: 4,
            tokens_max: 8,
            semantic_norm: 3.0,
            token_noise: 0.3,
            offset: 4.0,
            dominant_scale: 3.0,
            center: false,
            language: "synthetic".into(),
        }
    }
}

impl StsSpec {
    /// No offset or dominant direction: pooled cosine equals `gold / 5`.
    pub fn clean(pairs: usize, dims: usize, seed: u64) -> Self {
        StsSpec {
            pairs,
            dims,
            seed,
            offset: 0.0,
            dominant_scale: 0.0,
            ..Default::default()
        }
    }
}

/// Pairs with distinct gold scores `5·(i + ½)/P` in shuffled order. The
/// semantic vectors of a pair have cosine exactly `gold / 5`; each token adds
/// a zero-mean deviation, the shared offset and a random multiple of the
/// shared dominant direction.
pub fn sts_benchmark(spec: &StsSpec) -> (EmbeddingMatrix, StsDataset) {
    assert!(spec.pairs >= 2 && spec.dims >= 2 && 1 <= spec.tokens_min && spec.tokens_min <= spec.tokens_max);
    let mut rng = rng(spec.seed);
    let d = spec.dims;
    let offset = unit_vector(&mut rng, d) * spec.offset;
    let dominant = unit_vector(&mut rng, d);

    let mut golds: Vec<f64> = (0..spec.pairs)
        .map(|i| 5.0 * (i as f64 + 0.5) / spec.pairs as f64)
        .collect();
    golds.shuffle(&mut rng);

    let mut rows: Vec<Array1<f64>> = Vec::new();
    let mut meta = Vec::new();
    let mut pairs = Vec::with_capacity(spec.pairs);
    for (p, &gold) in golds.iter().enumerate() {
        let rho = gold / 5.0;
        let a = unit_vector(&mut rng, d);
        let mut n = unit_vector(&mut rng, d);
        n = &n - &(&a * a.dot(&n));
        let nn = n.dot(&n).sqrt();
        n /= nn;
        let b = &a * rho + &n * (1.0 - rho * rho).sqrt();
        let mut ranges = Vec::with_capacity(2);
        for (s, sem) in [a, b].into_iter().enumerate() {
            let sem = sem * spec.semantic_norm;
            let len = rng.random_range(spec.tokens_min..=spec.tokens_max);
            let mut devs = Array2::from_shape_fn((len, d), |_| spec.token_noise * normal(&mut rng));
            let mean = devs.mean_axis(Axis(0)).unwrap();
            devs -= &mean.insert_axis(Axis(0));
            let start = rows.len();
            for (t, dev) in devs.rows().into_iter().enumerate() {
                let coef = spec.dominant_scale * normal(&mut rng);
                rows.push(&sem + &dev + &offset + &(&dominant * coef));
                meta.push(TokenMeta::new(format!("s{p}_{s}_{t}"), t as i64, (2 * p + s) as i64));
            }
            ranges.push(start..rows.len());
        }
        pairs.push(StsPair {
            first: ranges[0].clone(),
            second: ranges[1].clone(),
            gold,
        });
    }
    let mut data = Array2::zeros((rows.len(), d));
    for (mut dst, src) in data.rows_mut().into_iter().zip(&rows) {
        dst.assign(src);
    }
    if spec.center {
        let mean = data.mean_axis(Axis(0)).unwrap();
        data -= &mean.insert_axis(Axis(0));
    }
    let n = data.nrows();
    let m = tagged(data, meta, &spec.language);
    let ds = StsDataset::new(pairs, n).expect("generated ranges are valid");
    (m, ds)
}
