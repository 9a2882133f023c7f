use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::text;

/// Smoothing added to joint probabilities.
pub const NPMI_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpmiResult<F> {
    pub value: Option<F>,
    pub topics_scored: usize,
    pub pairs_scored: usize,
    /// Pairs with a word that never occurs in the reference documents.
    pub pairs_skipped: usize,
}

/// Document-level NPMI of top-word pairs, averaged per topic then over topics.
pub fn npmi<F: Scalar>(topics: &[Vec<String>], documents: &[&str], eps: F) -> NpmiResult<F> {
    let docs: Vec<BTreeSet<String>> = documents
        .iter()
        .map(|d| text::words(d).into_iter().collect())
        .collect();
    let n_docs = F::from_usize_lossy(docs.len().max(1));
    let mut df_cache: BTreeMap<String, usize> = BTreeMap::new();
    let mut df = |w: &str| -> usize {
        *df_cache
            .entry(w.to_string())
            .or_insert_with(|| docs.iter().filter(|d| d.contains(w)).count())
    };
    let topic_words: Vec<Vec<String>> = topics
        .iter()
        .map(|t| t.iter().map(|w| w.to_lowercase()).collect())
        .collect();

    let mut per_topic = Vec::new();
    let mut pairs_scored = 0;
    let mut pairs_skipped = 0;
    for words in &topic_words {
        if words.len() < 2 {
            continue;
        }
        let mut sum = F::zero();
        let mut count = 0usize;
        for (a, wi) in words.iter().enumerate() {
            for wj in &words[a + 1..] {
                let (di, dj) = (df(wi), df(wj));
                if di == 0 || dj == 0 {
                    pairs_skipped += 1;
                    continue;
                }
                let dij = docs
                    .iter()
                    .filter(|d| d.contains(wi.as_str()) && d.contains(wj.as_str()))
                    .count();
                let pi = F::from_usize_lossy(di) / n_docs;
                let pj = F::from_usize_lossy(dj) / n_docs;
                let pij = F::from_usize_lossy(dij) / n_docs + eps;
                let value = if pij >= F::one() {
                    F::one()
                } else {
                    (pij.ln() - pi.ln() - pj.ln()) / -pij.ln()
                };
                sum += value;
                count += 1;
            }
        }
        pairs_scored += count;
        if count > 0 {
            per_topic.push(sum / F::from_usize_lossy(count));
        }
    }
    let topics_scored = per_topic.len();
    NpmiResult {
        value: (topics_scored > 0)
            .then(|| per_topic.into_iter().sum::<F>() / F::from_usize_lossy(topics_scored)),
        topics_scored,
        pairs_scored,
        pairs_skipped,
    }
}

/// Unique words over `T * k`.
pub fn topic_diversity<F: Scalar>(topics: &[Vec<String>], k: usize) -> Option<F> {
    if topics.is_empty() || k == 0 {
        return None;
    }
    let unique: BTreeSet<&str> = topics.iter().flatten().map(String::as_str).collect();
    Some(F::from_usize_lossy(unique.len()) / F::from_usize_lossy(topics.len() * k))
}

/// Word vectors keyed by lowercased token.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable<F> {
    vectors: BTreeMap<String, Vec<F>>,
    dims: usize,
}

impl<F: Scalar> WordVectorTable<F> {
    pub fn from_entries(entries: Vec<(String, Vec<F>)>) -> Result<Self> {
        let dims = entries.first().map_or(0, |e| e.1.len());
        let mut vectors = BTreeMap::new();
        for (word, v) in entries {
            if v.len() != dims {
                return Err(Error::Dimension(format!(
                    "word {word:?} has {} dims, table has {dims}",
                    v.len()
                )));
            }
            vectors.insert(word.to_lowercase(), v);
        }
        Ok(WordVectorTable { vectors, dims })
    }

    /// Plain text: a token followed by whitespace-separated decimals per
    /// line. A leading `count dims` header line is skipped.
    pub fn parse(src: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let v = values
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(F::lit)
                        .ok_or_else(|| Error::Parse {
                            line: i + 1,
                            message: format!("bad value {s:?}"),
                        })
                })
                .collect::<Result<Vec<F>>>()?;
            if v.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "word without vector".into(),
                });
            }
            entries.push((word.to_string(), v));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }

    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeResult<F> {
    pub value: Option<F>,
    pub topics_scored: usize,
    /// Topics with fewer than two words in the table.
    pub topics_skipped: usize,
}

/// Mean pairwise cosine of each topic's covered top words, averaged over topics.
pub fn we_alignment<F: Scalar>(topics: &[Vec<String>], table: &WordVectorTable<F>) -> WeResult<F> {
    let mut per_topic = Vec::new();
    let mut skipped = 0;
    for words in topics {
        let vs: Vec<&[F]> = words
            .iter()
            .filter_map(|w| table.get(&w.to_lowercase()))
            .collect();
        if vs.len() < 2 {
            skipped += 1;
            continue;
        }
        let mut sum = F::zero();
        let mut pairs = 0usize;
        for (a, x) in vs.iter().enumerate() {
            for y in &vs[a + 1..] {
                sum += scalar::cosine(x, y);
                pairs += 1;
            }
        }
        per_topic.push(sum / F::from_usize_lossy(pairs));
    }
    let scored = per_topic.len();
    WeResult {
        value: (scored > 0).then(|| per_topic.into_iter().sum::<F>() / F::from_usize_lossy(scored)),
        topics_scored: scored,
        topics_skipped: skipped,
    }
}
