//! Mean-pooled STS evaluation.
//!
//! A sentence vector is the arithmetic mean of its token rows and a pair is
//! scored by the cosine of its two sentence vectors. Systems are compared by
//! Spearman correlation with the gold scores, reported as a percentage.
//! When a transform is used it is applied to the token rows before pooling.

use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::metrics::isotropy_pc;
use crate::numerics::{norm, spearman};
use crate::store::{EmbeddingMatrix, StsDataset};
use crate::transform::IsotropyTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Raw embeddings.
    Baseline,
    /// Transform fit on the evaluated language itself.
    Individual,
    /// Transform fit on another language and reused unchanged.
    ZeroShot,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Baseline => "baseline",
            Setting::Individual => "individual",
            Setting::ZeroShot => "zero-shot",
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Setting::Baseline),
            "individual" => Ok(Setting::Individual),
            "zero-shot" => Ok(Setting::ZeroShot),
            other => Err(Error::Argument(format!(
                "unknown setting {other:?} (expected baseline, individual or zero-shot)"
            ))),
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean of the rows in `range`.
pub fn pool_sentence(m: &EmbeddingMatrix, range: Range<usize>) -> Result<Array1<f64>> {
    if range.start >= range.end {
        return Err(Error::Argument(format!("empty sentence range {range:?}")));
    }
    if range.end > m.rows() {
        return Err(Error::Argument(format!(
            "range {range:?} exceeds {} rows",
            m.rows()
        )));
    }
    let slice = m.data().slice_move(ndarray::s![range, ..]);
    Ok(slice.mean_axis(Axis(0)).expect("non-empty range"))
}

/// Cosine of the pooled sentence vectors, one score per pair, in dataset order.
pub fn score_pairs(m: &EmbeddingMatrix, ds: &StsDataset) -> Result<Vec<f64>> {
    ds.pairs()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let a = pool_sentence(m, p.first.clone())?;
            let b = pool_sentence(m, p.second.clone())?;
            let (na, nb) = (norm(a.view()), norm(b.view()));
            if na == 0.0 || nb == 0.0 {
                return Err(Error::Data(format!("pair {i}: pooled sentence vector has zero norm")));
            }
            Ok(a.dot(&b) / (na * nb))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StsProvenance {
    pub target_language: String,
    pub target_model_id: String,
    /// Language the transform was fit on; empty for the baseline.
    pub source_language: String,
    pub pooling: String,
    pub transform_stage: String,
    pub transform: Option<Value>,
}

/// Outcome of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StsResult {
    pub setting: Setting,
    /// `100 · ρ`, in `[-100, 100]`.
    pub spearman_pct: f64,
    pub n_pairs: usize,
    /// Partition-function isotropy of the evaluated token matrix.
    pub i_pc_after: f64,
    pub log_i_pc_after: f64,
    pub provenance: StsProvenance,
    #[serde(skip)]
    pub gold: Vec<f64>,
    #[serde(skip)]
    pub predicted: Vec<f64>,
}

impl StsResult {
    /// `gold<TAB>predicted` per pair, with a header line.
    pub fn pairs_tsv(&self) -> String {
        let mut out = String::from("gold\tpredicted\n");
        for (g, p) in self.gold.iter().zip(&self.predicted) {
            let _ = writeln!(out, "{g}\t{p}");
        }
        out
    }
}

fn check_setting(
    m: &EmbeddingMatrix,
    transform: Option<&IsotropyTransform>,
    setting: Setting,
) -> Result<()> {
    match (setting, transform) {
        (Setting::Baseline, Some(_)) => Err(Error::Argument(
            "the baseline setting takes no transform".into(),
        )),
        (Setting::Individual | Setting::ZeroShot, None) => Err(Error::Argument(format!(
            "the {setting} setting needs a transform"
        ))),
        (Setting::Baseline, None) => Ok(()),
        (_, Some(t)) => {
            let (src, dst) = (&t.provenance.source_language, &m.language);
            if src.is_empty() || dst.is_empty() {
                return Ok(());
            }
            match setting {
                Setting::Individual if src != dst => Err(Error::Argument(format!(
                    "individual setting: transform was fit on {src:?}, data is {dst:?}"
                ))),
                Setting::ZeroShot if src == dst => Err(Error::Argument(format!(
                    "zero-shot setting: transform was fit on the target language {dst:?}"
                ))),
                _ => Ok(()),
            }
        }
    }
}

/// Scores `ds` on `m` (transformed first when a transform is given) and
/// correlates with the gold scores. `m` itself is never modified.
pub fn evaluate(
    m: &EmbeddingMatrix,
    ds: &StsDataset,
    transform: Option<&IsotropyTransform>,
    setting: Setting,
) -> Result<StsResult> {
    check_setting(m, transform, setting)?;
    let transformed;
    let evaluated = match transform {
        Some(t) => {
            transformed = t.apply(m)?;
            &transformed
        }
        None => m,
    };
    let predicted = score_pairs(evaluated, ds)?;
    let gold = ds.golds();
    let rho = spearman(&predicted, &gold)?;
    let pc = isotropy_pc(evaluated)?;
    Ok(StsResult {
        setting,
        spearman_pct: 100.0 * rho,
        n_pairs: ds.len(),
        i_pc_after: pc.value,
        log_i_pc_after: pc.log_value,
        provenance: StsProvenance {
            target_language: m.language.clone(),
            target_model_id: m.model_id.clone(),
            source_language: transform
                .map(|t| t.provenance.source_language.clone())
                .unwrap_or_default(),
            pooling: "mean of token rows".into(),
            transform_stage: "token rows, before pooling".into(),
            transform: transform.map(IsotropyTransform::identity),
        },
        gold,
        predicted,
    })
}
