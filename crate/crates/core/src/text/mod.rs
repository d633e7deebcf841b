//! Text normalization: tokenize, lowercase, drop stopwords, stem.

mod porter;

use std::collections::BTreeSet;
use std::path::Path;

pub use porter::porter_stem;

use crate::error::IngestError;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Stem application is repeated until the token stops changing; the Porter
/// rules reach a fixed point within a few rounds.
const MAX_STEM_ROUNDS: usize = 8;

/// Normalized terms of one field value, in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TermList(Vec<String>);

impl TermList {
    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Terms sorted, for multiset comparison.
    pub fn sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.0.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }
}

impl From<Vec<String>> for TermList {
    fn from(terms: Vec<String>) -> Self {
        Self(terms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    stopwords: BTreeSet<String>,
    pub stem_enabled: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            stem_enabled: true,
        }
    }
}

impl PipelineConfig {
    pub fn new(stopwords: impl IntoIterator<Item = String>, stem_enabled: bool) -> Self {
        Self {
            stopwords: stopwords.into_iter().map(|w| w.to_lowercase()).collect(),
            stem_enabled,
        }
    }

    /// Reads a stopword file: one word per line, `#` starts a comment.
    pub fn with_stopword_file(path: &Path, stem_enabled: bool) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self {
            stopwords: parse_stopwords(&text),
            stem_enabled,
        })
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn is_stopword(&self, term: &str) -> bool {
        self.stopwords.contains(term)
    }
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Splits on every non-alphanumeric character and drops empty fragments.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect()
}

fn stem_fixed_point(token: &str) -> String {
    let mut current = porter_stem(token);
    for _ in 1..MAX_STEM_ROUNDS {
        let next = porter_stem(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Full pipeline: lowercase, tokenize, drop stopwords, stem.
///
/// Lowercasing happens before splitting so that case mappings which expand
/// into several characters cannot produce new token boundaries later.
/// Stopwords are filtered both before and after stemming, so a stem that
/// collides with a stopword is dropped as well.
pub fn normalize(text: &str, cfg: &PipelineConfig) -> TermList {
    let lower = text.to_lowercase();
    let terms = tokenize(&lower)
        .into_iter()
        .filter(|t| !cfg.is_stopword(t))
        .map(|t| {
            if cfg.stem_enabled {
                stem_fixed_point(t)
            } else {
                t.to_owned()
            }
        })
        .filter(|t| !t.is_empty() && !cfg.is_stopword(t))
        .collect();
    TermList(terms)
}
