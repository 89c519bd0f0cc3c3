//! Embedding matrices, token metadata and the on-disk formats around them.
//!
//! An embedding file holds an `M × d` matrix of 32-bit little-endian floats
//! behind a fixed 28-byte header (see [`binary`]). Per-row metadata lives in a
//! JSON-lines sidecar next to it (`<path>.meta.jsonl`). In memory every value
//! is held as `f64`.

mod binary;
mod freq;
mod sts;

use std::ops::Range;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use binary::{load_matrix, save_matrix, sidecar_path, HEADER_LEN, MAGIC, VERSION};
pub use freq::{attach_frequencies, FrequencyCoverage, FrequencyTable};
pub use sts::{load_sts, save_sts, StsDataset, StsPair};

/// Metadata for one row (one sub-token occurrence).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenMeta {
    pub token: String,
    /// Word this sub-token belongs to, `-1` if unknown.
    #[serde(rename = "word")]
    pub word_index: i64,
    #[serde(rename = "sent")]
    pub sentence_index: i64,
    #[serde(rename = "freq", default, skip_serializing_if = "Option::is_none")]
    pub frequency_per_million: Option<f64>,
}

impl TokenMeta {
    pub fn new(token: impl Into<String>, word_index: i64, sentence_index: i64) -> Self {
        TokenMeta {
            token: token.into(),
            word_index,
            sentence_index,
            frequency_per_million: None,
        }
    }
}

/// A contiguous run of rows that make up one word occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpan {
    pub sentence_index: i64,
    pub word_index: i64,
    pub rows: Range<usize>,
}

/// `M × d` token representations plus per-row metadata.
///
/// Invariants (checked on construction): `M > 0`, `d > 0`, one [`TokenMeta`]
/// per row, every value finite, sentence indices non-decreasing and word
/// indices non-decreasing within a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
    meta: Vec<TokenMeta>,
    pub language: String,
    pub model_id: String,
    /// Free-form provenance carried through the sidecar (extractor settings etc.).
    pub provenance: Map<String, Value>,
}

impl EmbeddingMatrix {
    pub fn new(data: Array2<f64>, meta: Vec<TokenMeta>) -> Result<Self> {
        validate_data(data.view())?;
        validate_meta(&meta, data.nrows())?;
        Ok(EmbeddingMatrix {
            data,
            meta,
            language: String::new(),
            model_id: String::new(),
            provenance: Map::new(),
        })
    }

    /// Builds a matrix with placeholder metadata: row `i` is word `i` of sentence 0.
    pub fn from_data(data: Array2<f64>) -> Result<Self> {
        let meta = (0..data.nrows())
            .map(|i| TokenMeta::new(format!("t{i}"), i as i64, 0))
            .collect();
        Self::new(data, meta)
    }

    /// Convenience constructor from nested rows, with placeholder metadata.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Consistency("rows have differing lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::Consistency(e.to_string()))?;
        Self::from_data(data)
    }

    pub fn with_tags(mut self, language: impl Into<String>, model_id: impl Into<String>) -> Self {
        self.language = language.into();
        self.model_id = model_id.into();
        self
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dims(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn meta(&self) -> &[TokenMeta] {
        &self.meta
    }

    /// Same metadata and tags, new values. Used by transforms, which never touch metadata.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        if data.nrows() != self.rows() {
            return Err(Error::Consistency(format!(
                "replacement data has {} rows, matrix has {}",
                data.nrows(),
                self.rows()
            )));
        }
        validate_data(data.view())?;
        Ok(EmbeddingMatrix {
            data,
            meta: self.meta.clone(),
            language: self.language.clone(),
            model_id: self.model_id.clone(),
            provenance: self.provenance.clone(),
        })
    }

    pub(crate) fn meta_mut(&mut self) -> &mut [TokenMeta] {
        &mut self.meta
    }

    /// Word occurrences, in row order. Rows with `word_index < 0` belong to no word.
    pub fn word_spans(&self) -> Vec<WordSpan> {
        let mut spans: Vec<WordSpan> = Vec::new();
        for (i, m) in self.meta.iter().enumerate() {
            if m.word_index < 0 {
                continue;
            }
            match spans.last_mut() {
                Some(s)
                    if s.rows.end == i
                        && s.sentence_index == m.sentence_index
                        && s.word_index == m.word_index =>
                {
                    s.rows.end = i + 1
                }
                _ => spans.push(WordSpan {
                    sentence_index: m.sentence_index,
                    word_index: m.word_index,
                    rows: i..i + 1,
                }),
            }
        }
        spans
    }

    /// Case-folded surface form of a word occurrence, rebuilt from its sub-tokens.
    ///
    /// Sub-tokens are concatenated in order. A leading `##` on continuation
    /// pieces and a leading `▁` or `Ġ` on the first piece are dropped, which
    /// covers WordPiece, SentencePiece and byte-level BPE dumps.
    pub fn word_text(&self, span: &WordSpan) -> String {
        let mut out = String::new();
        for (k, i) in span.rows.clone().enumerate() {
            let tok = self.meta[i].token.as_str();
            let piece = if k == 0 {
                tok.trim_start_matches(['▁', 'Ġ'])
            } else {
                tok.strip_prefix("##").unwrap_or(tok)
            };
            out.push_str(piece);
        }
        out.to_lowercase()
    }
}

pub(crate) fn validate_data(data: ArrayView2<'_, f64>) -> Result<()> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::Consistency(format!(
            "matrix must be non-empty, got {}x{}",
            data.nrows(),
            data.ncols()
        )));
    }
    for (i, row) in data.rows().into_iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "row {i} has a non-finite value at dimension {j}"
            )));
        }
    }
    Ok(())
}

fn validate_meta(meta: &[TokenMeta], rows: usize) -> Result<()> {
    if meta.len() != rows {
        return Err(Error::Consistency(format!(
            "{} metadata entries for {rows} rows",
            meta.len()
        )));
    }
    let mut prev_sent = i64::MIN;
    let mut prev_word = i64::MIN;
    for (i, m) in meta.iter().enumerate() {
        if m.word_index < -1 {
            return Err(Error::Data(format!("row {i}: word index {} < -1", m.word_index)));
        }
        if let Some(f) = m.frequency_per_million {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::Data(format!("row {i}: invalid frequency {f}")));
            }
        }
        if m.sentence_index < prev_sent {
            return Err(Error::Consistency(format!(
                "row {i}: sentence index {} decreases (previous {prev_sent})",
                m.sentence_index
            )));
        }
        if m.sentence_index != prev_sent {
            prev_sent = m.sentence_index;
            prev_word = i64::MIN;
        }
        if m.word_index >= 0 {
            if m.word_index < prev_word {
                return Err(Error::Consistency(format!(
                    "row {i}: word index {} decreases within sentence {}",
                    m.word_index, m.sentence_index
                )));
            }
            prev_word = m.word_index;
        }
    }
    Ok(())
}
