use std::fmt::Write as _;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{pca, PcaResult};
use crate::store::EmbeddingMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqRecord {
    pub word: String,
    pub frequency_per_million: f64,
    pub pc1: f64,
    pub pc2: f64,
}

/// Plot-ready coordinates of word occurrences, one record per occurrence that
/// carries a frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqBiasExport {
    pub records: Vec<FreqRecord>,
    /// Centered PCA fit on all word vectors. Holds fewer than two components
    /// only when there are fewer than two words or dimensions; missing
    /// coordinates are reported as 0.
    pub pca_basis: PcaResult,
}

impl FreqBiasExport {
    /// `word<TAB>freq<TAB>pc1<TAB>pc2`, no header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                r.word, r.frequency_per_million, r.pc1, r.pc2
            );
        }
        out
    }
}

/// Word vectors are the mean of their sub-token rows.
pub fn frequency_bias_export(m: &EmbeddingMatrix) -> Result<FreqBiasExport> {
    let spans = m.word_spans();
    if spans.is_empty() {
        return Err(Error::Precondition("no rows carry a word index".into()));
    }
    let mut vectors = Array2::<f64>::zeros((spans.len(), m.dims()));
    for (mut out, span) in vectors.rows_mut().into_iter().zip(&spans) {
        for i in span.rows.clone() {
            out += &m.row(i);
        }
        out /= span.rows.len() as f64;
    }
    let freqs: Vec<Option<f64>> = spans
        .iter()
        .map(|s| m.meta()[s.rows.clone()].iter().find_map(|t| t.frequency_per_million))
        .collect();
    if freqs.iter().all(Option::is_none) {
        return Err(Error::Precondition(
            "no word has a frequency attached; run attach_frequencies first".into(),
        ));
    }

    let r = 2.min(spans.len()).min(m.dims());
    let basis = pca(vectors.view(), true, r)?;
    let coords = basis.project(vectors.view());
    let records = spans
        .iter()
        .enumerate()
        .filter_map(|(w, span)| {
            freqs[w].map(|f| FreqRecord {
                word: m.word_text(span),
                frequency_per_million: f,
                pc1: if r > 0 { coords[[w, 0]] } else { 0.0 },
                pc2: if r > 1 { coords[[w, 1]] } else { 0.0 },
            })
        })
        .collect();
    Ok(FreqBiasExport {
        records,
        pca_basis: basis,
    })
}
