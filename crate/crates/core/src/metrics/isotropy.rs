use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, norm, sample_pairs, symmetric_eigen};
use crate::store::EmbeddingMatrix;

fn sampled_pairs_with_norms(
    m: &EmbeddingMatrix,
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<(usize, usize, f64)>> {
    if n_pairs == 0 {
        return Err(Error::Argument("n_pairs must be positive".into()));
    }
    let pairs = sample_pairs(m.rows(), n_pairs, seed)?;
    let mut norms: Vec<Option<f64>> = vec![None; m.rows()];
    let mut norm_of = |i: usize| -> Result<f64> {
        let n = *norms[i].get_or_insert_with(|| norm(m.row(i)));
        if n == 0.0 {
            return Err(Error::Data(format!("row {i} has zero norm")));
        }
        Ok(n)
    };
    pairs
        .into_iter()
        .map(|(i, j)| Ok((i, j, norm_of(i)? * norm_of(j)?)))
        .collect()
}

/// Mean cosine similarity over `n_pairs` seeded random pairs of distinct rows.
pub fn isotropy_cos(m: &EmbeddingMatrix, n_pairs: usize, seed: u64) -> Result<f64> {
    let pairs = sampled_pairs_with_norms(m, n_pairs, seed)?;
    let total: f64 = pairs
        .iter()
        .map(|&(i, j, nn)| m.row(i).dot(&m.row(j)) / nn)
        .sum();
    Ok(total / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimContribution {
    pub dim: usize,
    pub mean_contribution: f64,
}

/// Per-dimension split of the mean cosine similarity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionReport {
    /// `Σᵢ mean CCᵢ`, which is the mean cosine over the same pairs.
    pub i_cos: f64,
    /// Mean over pairs of `xᵢ yᵢ / (‖x‖ ‖y‖)`, one entry per dimension.
    pub mean_contributions: Vec<f64>,
    /// The `top_k` dimensions by mean contribution, descending.
    pub top_contributions: Vec<DimContribution>,
    pub n_pairs: usize,
    pub seed: u64,
}

/// Averages every dimension's contribution over all pairs, then ranks.
pub fn dimension_contributions(
    m: &EmbeddingMatrix,
    n_pairs: usize,
    seed: u64,
    top_k: usize,
) -> Result<ContributionReport> {
    let pairs = sampled_pairs_with_norms(m, n_pairs, seed)?;
    let mut sums = vec![0.0; m.dims()];
    for &(i, j, nn) in &pairs {
        for ((s, x), y) in sums.iter_mut().zip(m.row(i)).zip(m.row(j)) {
            *s += x * y / nn;
        }
    }
    let n = pairs.len() as f64;
    let mean_contributions: Vec<f64> = sums.into_iter().map(|s| s / n).collect();
    let i_cos = mean_contributions.iter().sum();

    let mut ranked: Vec<DimContribution> = mean_contributions
        .iter()
        .enumerate()
        .map(|(dim, &c)| DimContribution {
            dim,
            mean_contribution: c,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.mean_contribution
            .total_cmp(&a.mean_contribution)
            .then(a.dim.cmp(&b.dim))
    });
    ranked.truncate(top_k);

    Ok(ContributionReport {
        i_cos,
        mean_contributions,
        top_contributions: ranked,
        n_pairs,
        seed,
    })
}

/// Partition-function isotropy and the quantities it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotropyPc {
    /// `min F / max F`, in `(0, 1]` (may underflow to 0 for extremely anisotropic spaces;
    /// `log_value` stays exact).
    pub value: f64,
    pub log_value: f64,
    pub log_f_min: f64,
    pub log_f_max: f64,
    /// Directions evaluated: both signs of every eigenvector.
    pub n_directions: usize,
    /// Some eigenvalues of `WᵀW` coincide to within `1e-10`, so the eigenbasis is not unique.
    pub near_degenerate: bool,
}

/// `min_u F(u) / max_u F(u)` over `±u` for every eigenvector `u` of the
/// uncentered `WᵀW`, evaluated in log space.
pub fn isotropy_pc(m: &EmbeddingMatrix) -> Result<IsotropyPc> {
    if m.rows() < 2 {
        return Err(Error::Argument(format!("need at least 2 rows, got {}", m.rows())));
    }
    let w = m.data();
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::Data("all-zero matrix has no eigen-directions".into()));
    }
    let gram = w.t().dot(&w);
    let eig = symmetric_eigen(gram.view())?;
    // column j holds uⱼᵀwᵢ for every row i
    let proj = w.dot(&eig.eigenvectors.t());
    let mut log_f_min = f64::INFINITY;
    let mut log_f_max = f64::NEG_INFINITY;
    for col in proj.columns() {
        for f in [
            log_sum_exp(col.iter().copied()),
            log_sum_exp(col.iter().map(|v| -v)),
        ] {
            log_f_min = log_f_min.min(f);
            log_f_max = log_f_max.max(f);
        }
    }
    if !(log_f_min.is_finite() && log_f_max.is_finite()) {
        return Err(Error::Numeric("partition function is not finite".into()));
    }
    let log_value = log_f_min - log_f_max;
    Ok(IsotropyPc {
        value: log_value.exp(),
        log_value,
        log_f_min,
        log_f_max,
        n_directions: 2 * m.dims(),
        near_degenerate: eig.near_degenerate(m.dims()),
    })
}

/// Parameters echoed into every [`IsotropyReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportParams {
    pub n_pairs: usize,
    pub seed: u64,
    pub top_k: usize,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            n_pairs: super::DEFAULT_PAIRS,
            seed: 0,
            top_k: super::DEFAULT_TOP_K,
        }
    }
}

/// Both isotropy measures plus the per-dimension breakdown for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotropyReport {
    pub language: String,
    pub model_id: String,
    pub rows: usize,
    pub dims: usize,
    pub params: ReportParams,
    pub i_cos: f64,
    pub i_pc: f64,
    pub log_i_pc: f64,
    pub i_pc_near_degenerate: bool,
    pub top_contributions: Vec<DimContribution>,
    pub mean_contributions: Vec<f64>,
    /// How `top_contributions` is formed.
    pub contribution_averaging: String,
}

pub fn isotropy_report(m: &EmbeddingMatrix, params: ReportParams) -> Result<IsotropyReport> {
    let contrib = dimension_contributions(m, params.n_pairs, params.seed, params.top_k)?;
    let pc = isotropy_pc(m)?;
    Ok(IsotropyReport {
        language: m.language.clone(),
        model_id: m.model_id.clone(),
        rows: m.rows(),
        dims: m.dims(),
        params,
        i_cos: contrib.i_cos,
        i_pc: pc.value,
        log_i_pc: pc.log_value,
        i_pc_near_degenerate: pc.near_degenerate,
        top_contributions: contrib.top_contributions,
        mean_contributions: contrib.mean_contributions,
        contribution_averaging: "mean over all pairs per dimension, then ranked".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[Vec<f64>]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn orthogonal_rows() {
        let m = mat(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(isotropy_cos(&m, 50, 3).unwrap(), 0.0);
    }

    #[test]
    fn forty_five_degrees() {
        let s = 1.0 / 2f64.sqrt();
        let m = mat(&[vec![1.0, 0.0], vec![s, s]]);
        assert!((isotropy_cos(&m, 17, 0).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn parallel_rows() {
        let m = mat(&[vec![1.0, 2.0], vec![0.5, 1.0], vec![3.0, 6.0]]);
        assert!((isotropy_cos(&m, 100, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_row_is_reported() {
        let m = mat(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        match isotropy_cos(&m, 5, 0) {
            Err(Error::Data(s)) => assert!(s.contains("row 1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_axis_contribution() {
        let m = mat(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        let r = dimension_contributions(&m, 1, 0, 3).unwrap();
        assert_eq!(r.mean_contributions, vec![1.0, 0.0, 0.0]);
        assert_eq!(r.top_contributions[0], DimContribution { dim: 0, mean_contribution: 1.0 });
        assert_eq!(r.top_contributions[1].dim, 1);
    }

    #[test]
    fn three_four_five() {
        let m = mat(&[vec![3.0, 4.0], vec![3.0, 4.0]]);
        let r = dimension_contributions(&m, 1, 0, 1).unwrap();
        assert!((r.mean_contributions[0] - 0.36).abs() < 1e-15);
        assert!((r.mean_contributions[1] - 0.64).abs() < 1e-15);
        assert!((r.i_cos - 1.0).abs() < 1e-15);
        assert_eq!(r.top_contributions.len(), 1);
        assert_eq!(r.top_contributions[0].dim, 1);
    }

    #[test]
    fn partition_ratio_on_scaled_axes() {
        let m = mat(&[
            vec![2.0, 0.0],
            vec![-2.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ]);
        let pc = isotropy_pc(&m).unwrap();
        let e = std::f64::consts::E;
        let f1 = e * e + 1.0 / (e * e) + 2.0;
        let f2 = e + 1.0 / e + 2.0;
        assert!((pc.value - f2 / f1).abs() < 1e-12);
        assert!((pc.value - 0.5340).abs() < 1e-4);
        assert!(!pc.near_degenerate);
    }

    #[test]
    fn symmetric_cross_is_isotropic() {
        let m = mat(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ]);
        let pc = isotropy_pc(&m).unwrap();
        assert!((pc.value - 1.0).abs() < 1e-9);
        assert!(pc.near_degenerate);
    }

    #[test]
    fn identical_rows_are_strongly_anisotropic() {
        // F(±v/‖v‖) = M·e^{±‖v‖}, every orthogonal direction gives F = M,
        // so the ratio is e^{-2‖v‖}.
        let v = vec![1.0, 2.0, 2.0];
        let m = mat(&[v.clone(), v.clone(), v.clone(), v]);
        let pc = isotropy_pc(&m).unwrap();
        assert!((pc.log_value + 6.0).abs() < 1e-9);
        assert!(pc.value < 0.01);
    }

    #[test]
    fn all_zero_is_an_error() {
        let m = mat(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(isotropy_pc(&m), Err(Error::Data(_))));
    }
}
