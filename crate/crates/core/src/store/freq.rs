use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Case-folded word → occurrences per million.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    rates: HashMap<String, f64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, per_million: f64) -> Result<()> {
        if !per_million.is_finite() || per_million < 0.0 {
            return Err(Error::Data(format!(
                "frequency for {word:?} must be a non-negative number, got {per_million}"
            )));
        }
        self.rates.insert(word.to_lowercase(), per_million);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.rates.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Parses `word<TAB>per_million` lines. Blank lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, rate) = line.split_once('\t').ok_or_else(|| {
                Error::Format(format!("frequency table line {}: expected two columns", lineno + 1))
            })?;
            let rate: f64 = rate.trim().parse().map_err(|_| {
                Error::Format(format!("frequency table line {}: bad number {rate:?}", lineno + 1))
            })?;
            table.insert(word, rate)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    /// TSV in sorted word order.
    pub fn to_tsv(&self) -> String {
        let mut words: Vec<_> = self.rates.iter().collect();
        words.sort_by(|a, b| a.0.cmp(b.0));
        words.iter().map(|(w, r)| format!("{w}\t{r}\n")).collect()
    }
}

/// How many word occurrences found a frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyCoverage {
    pub words_total: usize,
    pub words_matched: usize,
    pub coverage: f64,
    /// Distinct unmatched words, sorted.
    pub unmatched: Vec<String>,
}

/// Sets `frequency_per_million` on every sub-token row of each word found in
/// `table`. Rows of unmatched words keep whatever they had.
pub fn attach_frequencies(
    m: &EmbeddingMatrix,
    table: &FrequencyTable,
) -> (EmbeddingMatrix, FrequencyCoverage) {
    let mut out = m.clone();
    let spans = m.word_spans();
    let mut matched = 0;
    let mut unmatched = Vec::new();
    for span in &spans {
        let word = m.word_text(span);
        match table.get(&word) {
            Some(rate) => {
                matched += 1;
                for meta in &mut out.meta_mut()[span.rows.clone()] {
                    meta.frequency_per_million = Some(rate);
                }
            }
            None => unmatched.push(word),
        }
    }
    unmatched.sort();
    unmatched.dedup();
    let coverage = if spans.is_empty() {
        0.0
    } else {
        matched as f64 / spans.len() as f64
    };
    (
        out,
        FrequencyCoverage {
            words_total: spans.len(),
            words_matched: matched,
            coverage,
            unmatched,
        },
    )
}
