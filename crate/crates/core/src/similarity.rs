//! Candidate scoring: per-field BM25 over the existing corpus, the
//! inverse-distance boost, and the containment baseline.
//!
//! For a query `q` (the terms of an incoming object's field) and a stored
//! document `d`:
//!
//! ```text
//! score(q, d) = sum_{t in q} tfNorm(t, d) * idf(t) + DistBoost(q, d)
//! tfNorm      = freq * (k1 + 1) / (freq + k1 * (1 - b + b * fieldLength / avgFieldLength))
//! idf(t)      = ln(1 + (docCount - docFreq + 0.5) / (docFreq + 0.5))
//! ```
//!
//! `DistBoost` is `1 / max(distance, 1 m)`, normalized to `[0, 1]` within the
//! candidate set and scaled by the set's largest text score.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ScoreError};
use crate::text::TermList;

/// Inverse distances are floored at this many meters.
pub const MIN_BOOST_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(ConfigError::Bm25("k1"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(ConfigError::Bm25("b"));
        }
        Ok(())
    }
}

/// Corpus statistics and postings for one field across all stored documents.
///
/// Documents are addressed by their position in the corpus. A document whose
/// field is missing counts toward `doc_count` with length 0.
#[derive(Debug, Clone, Default)]
pub struct FieldCorpusStats {
    field_lengths: Vec<u32>,
    avg_field_length: f64,
    /// term -> (doc, freq), sorted by doc.
    postings: HashMap<String, Vec<(u32, u32)>>,
}

impl FieldCorpusStats {
    pub fn build<'a>(docs: impl IntoIterator<Item = Option<&'a TermList>>) -> Self {
        let mut field_lengths = Vec::new();
        let mut postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        for (doc, terms) in docs.into_iter().enumerate() {
            let doc = doc as u32;
            let terms = terms.map(TermList::terms).unwrap_or(&[]);
            field_lengths.push(terms.len() as u32);
            for t in terms {
                let list = postings.entry(t.clone()).or_default();
                match list.last_mut() {
                    Some((d, f)) if *d == doc => *f += 1,
                    _ => list.push((doc, 1)),
                }
            }
        }
        let total: u64 = field_lengths.iter().map(|&l| u64::from(l)).sum();
        let avg_field_length = if field_lengths.is_empty() {
            0.0
        } else {
            total as f64 / field_lengths.len() as f64
        };
        Self {
            field_lengths,
            avg_field_length,
            postings,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.field_lengths.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn field_length(&self, doc: usize) -> u32 {
        self.field_lengths[doc]
    }

    pub fn avg_field_length(&self) -> f64 {
        self.avg_field_length
    }

    pub fn term_freq(&self, term: &str, doc: usize) -> u32 {
        let Some(list) = self.postings.get(term) else {
            return 0;
        };
        list.binary_search_by_key(&(doc as u32), |&(d, _)| d)
            .map_or(0, |i| list[i].1)
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.doc_count(), self.doc_freq(term))
    }
}

pub fn idf(doc_count: usize, doc_freq: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub fn tf_norm(freq: u32, field_length: u32, avg_field_length: f64, params: Bm25Params) -> Result<f64, ScoreError> {
    if avg_field_length <= 0.0 || !avg_field_length.is_finite() {
        return Err(ScoreError::EmptyCorpus);
    }
    let freq = f64::from(freq);
    let len_norm = 1.0 - params.b + params.b * f64::from(field_length) / avg_field_length;
    Ok(freq * (params.k1 + 1.0) / (freq + params.k1 * len_norm))
}

/// BM25 text score of `doc` for `query`. Every query term instance
/// contributes, so a repeated query term counts repeatedly.
pub fn bm25_score(query: &[String], doc: usize, stats: &FieldCorpusStats, params: Bm25Params) -> f64 {
    let field_length = stats.field_length(doc);
    query
        .iter()
        .map(|t| {
            let freq = stats.term_freq(t, doc);
            if freq == 0 {
                return 0.0;
            }
            // freq > 0 implies a non-empty corpus field, so the average is positive.
            let tf =
                tf_norm(freq, field_length, stats.avg_field_length(), params).expect("positive average field length");
            tf * stats.idf(t)
        })
        .sum()
}

/// Score decomposition for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub text_score: f64,
    pub dist_boost: f64,
    pub total: f64,
    pub distance_m: f64,
}

/// Distance boosts for a candidate set given as `(distance_m, text_score)`.
///
/// `boost = (inv / max_inv) * max_text` with `inv = 1 / max(distance, 1 m)`.
/// All boosts are 0 when no candidate has a positive text score.
pub fn dist_boost(candidates: &[(f64, f64)]) -> Vec<f64> {
    let max_text = candidates.iter().map(|c| c.1).fold(0.0, f64::max);
    if max_text <= 0.0 {
        return vec![0.0; candidates.len()];
    }
    let inv: Vec<f64> = candidates
        .iter()
        .map(|(d, _)| 1.0 / d.max(MIN_BOOST_DISTANCE_M))
        .collect();
    let max_inv = inv.iter().copied().fold(0.0, f64::max);
    inv.iter().map(|r| (r / max_inv) * max_text).collect()
}

/// Combines text scores with distance boosts over one neighborhood.
pub fn combine(candidates: &[(f64, f64)]) -> Vec<ScoreBreakdown> {
    dist_boost(candidates)
        .into_iter()
        .zip(candidates)
        .map(|(boost, &(distance_m, text_score))| ScoreBreakdown {
            text_score,
            dist_boost: boost,
            total: text_score + boost,
            distance_m,
        })
        .collect()
}

/// True iff one lowercased text contains the other.
pub fn containment_similar(a: &str, b: &str) -> bool {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    a.contains(&b) || b.contains(&a)
}
