use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

/// One scored sentence pair. Each sentence is a half-open row range of the
/// embedding matrix it was loaded against.
#[derive(Debug, Clone, PartialEq)]
pub struct StsPair {
    pub first: Range<usize>,
    pub second: Range<usize>,
    pub gold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsDataset {
    pairs: Vec<StsPair>,
}

impl StsDataset {
    /// Validates every pair against a matrix with `rows` rows.
    pub fn new(pairs: Vec<StsPair>, rows: usize) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            validate_pair(i, p, rows)?;
        }
        Ok(StsDataset { pairs })
    }

    pub fn pairs(&self) -> &[StsPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn golds(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.gold).collect()
    }

    /// `s1_start<TAB>s1_end<TAB>s2_start<TAB>s2_end<TAB>score` per pair.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                p.first.start, p.first.end, p.second.start, p.second.end, p.gold
            );
        }
        out
    }
}

fn validate_pair(i: usize, p: &StsPair, rows: usize) -> Result<()> {
    if !(p.gold.is_finite() && (0.0..=5.0).contains(&p.gold)) {
        return Err(Error::Data(format!("pair {i}: score {} outside [0, 5]", p.gold)));
    }
    for r in [&p.first, &p.second] {
        if r.start >= r.end {
            return Err(Error::Consistency(format!("pair {i}: empty range {r:?}")));
        }
        if r.end > rows {
            return Err(Error::Consistency(format!(
                "pair {i}: range {r:?} exceeds {rows} rows"
            )));
        }
    }
    if p.first.start < p.second.end && p.second.start < p.first.end {
        return Err(Error::Consistency(format!(
            "pair {i}: sentence ranges {:?} and {:?} overlap",
            p.first, p.second
        )));
    }
    Ok(())
}

fn parse_sts(text: &str, rows: usize) -> Result<StsDataset> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::Format(format!(
                "STS line {}: expected 5 tab-separated columns, got {}",
                lineno + 1,
                cols.len()
            )));
        }
        let idx = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| {
                Error::Format(format!("STS line {}: bad row index {s:?}", lineno + 1))
            })
        };
        let gold: f64 = cols[4].trim().parse().map_err(|_| {
            Error::Format(format!("STS line {}: bad score {:?}", lineno + 1, cols[4]))
        })?;
        pairs.push(StsPair {
            first: idx(cols[0])?..idx(cols[1])?,
            second: idx(cols[2])?..idx(cols[3])?,
            gold,
        });
    }
    StsDataset::new(pairs, rows)
}

/// Reads an STS pair file and validates it against `m`.
pub fn load_sts(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<StsDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sts(&text, m.rows())
}

pub fn save_sts(ds: &StsDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, ds.to_tsv()).map_err(|e| Error::io(path, e))
}
