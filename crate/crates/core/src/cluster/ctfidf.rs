//! Class-based TF-IDF topic representations.
//!
//! Every non-outlier topic pools its segments' tokens into one class. The
//! weight of term `t` in class `c` is `tf(t, c) * ln(1 + A / f(t))` where `A`
//! is the mean token count per class and `f(t)` the term's total frequency
//! across classes.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Segment;
use crate::text::{self, Stopwords};

pub type TermCounts = BTreeMap<String, u64>;
pub type TermWeights = BTreeMap<String, f64>;

/// Tokenizes every transcript and drops terms whose document frequency is
/// below `min_doc_freq` (and stopwords, if any).
pub fn tokenize_documents(
    segments: &[Segment],
    min_token_chars: usize,
    min_doc_freq: usize,
    stopwords: &Stopwords,
) -> Vec<Vec<String>> {
    let docs: Vec<Vec<String>> = segments
        .iter()
        .map(|s| {
            text::tokens(&s.text, min_token_chars)
                .into_iter()
                .filter(|t| !stopwords.contains(t))
                .collect()
        })
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &docs {
        let unique: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let keep: BTreeSet<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_doc_freq)
        .map(|(t, _)| t.to_string())
        .collect();
    docs.into_iter()
        .map(|d| d.into_iter().filter(|t| keep.contains(t)).collect())
        .collect()
}

/// Pooled term counts per topic id; outliers (negative labels) are skipped.
pub fn class_counts(labels: &[i64], docs: &[Vec<String>], n_topics: usize) -> Vec<TermCounts> {
    let mut classes = vec![TermCounts::new(); n_topics];
    for (&label, doc) in labels.iter().zip(docs) {
        if label < 0 {
            continue;
        }
        let class = &mut classes[label as usize];
        for t in doc {
            *class.entry(t.clone()).or_default() += 1;
        }
    }
    classes
}

/// c-TF-IDF weights for every class.
pub fn class_weights(classes: &[TermCounts]) -> Vec<TermWeights> {
    if classes.is_empty() {
        return Vec::new();
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total = 0u64;
    for class in classes {
        for (t, &c) in class {
            *freq.entry(t).or_default() += c;
            total += c;
        }
    }
    let avg = total as f64 / classes.len() as f64;
    classes
        .iter()
        .map(|class| {
            class
                .iter()
                .map(|(t, &c)| {
                    let f = freq[t.as_str()] as f64;
                    (t.clone(), c as f64 * (1.0 + avg / f).ln())
                })
                .collect()
        })
        .collect()
}

/// Highest-weight terms, ties broken lexicographically.
pub fn top_words(weights: &TermWeights, k: usize) -> Vec<(String, f64)> {
    let mut terms: Vec<(String, f64)> = weights
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(t, &w)| (t.clone(), w))
        .collect();
    terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(k);
    terms
}

/// Cosine similarity of two sparse weight vectors.
pub fn sparse_cosine(a: &TermWeights, b: &TermWeights) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, &w)| large.get(t).map(|&v| w * v))
        .sum();
    let na = a.values().map(|w| w * w).sum::<f64>().sqrt();
    let nb = b.values().map(|w| w * w).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
