//! Extractive topic summaries by TF-IDF centroid similarity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::text::{self, Stopwords};

/// Sentences shorter than this many words are merged into their neighbour.
pub const MIN_SENTENCE_WORDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    TfidfCentroid,
    TokenFrequencyFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySentence {
    pub text: String,
    pub score: f64,
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub sentences: Vec<SummarySentence>,
    pub method: SummaryMethod,
    /// No segment had usable text.
    pub empty: bool,
}

/// Splits on `.`, `!` or `?` followed by whitespace or end of text. Fragments
/// under [`MIN_SENTENCE_WORDS`] words merge into the following fragment (the
/// last one merges backwards). Returned slices borrow from `text`.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_break = chars.peek().map_or(true, |&(_, n)| n.is_whitespace());
            if at_break {
                let end = i + c.len_utf8();
                spans.push((start, end));
                start = end;
            }
        }
    }
    if start < text.len() {
        spans.push((start, text.len()));
    }
    let spans: Vec<(usize, usize)> = spans
        .into_iter()
        .map(|(s, e)| trim_span(text, s, e))
        .filter(|&(s, e)| s < e)
        .collect();

    let word_count = |(s, e): (usize, usize)| text::words(&text[s..e]).len();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    let mut pending: Option<usize> = None;
    for span in spans {
        let span = (pending.take().unwrap_or(span.0), span.1);
        if word_count(span) < MIN_SENTENCE_WORDS {
            pending = Some(span.0);
        } else {
            merged.push(span);
        }
    }
    if let Some(s) = pending {
        match merged.last_mut() {
            Some(last) => last.1 = text.len(),
            None => merged.push((s, text.len())),
        }
        if let Some(last) = merged.last_mut() {
            *last = trim_span(text, last.0, last.1);
        }
    }
    merged
        .into_iter()
        .filter(|&(s, e)| s < e)
        .map(|(s, e)| &text[s..e])
        .collect()
}

fn trim_span(text: &str, s: usize, e: usize) -> (usize, usize) {
    let slice = &text[s..e];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    (s + lead, (e - trail).max(s + lead))
}

struct Candidate<'a> {
    text: &'a str,
    segment: usize,
    position: usize,
}

/// Picks up to `k_max` sentences closest to the topic's TF-IDF centroid.
pub fn summarize_topic(
    topic_id: usize,
    segments: &[&Segment],
    k_max: usize,
    stopwords: &Stopwords,
) -> TopicSummary {
    let mut candidates = Vec::new();
    for seg in segments {
        for (position, s) in split_sentences(&seg.text).into_iter().enumerate() {
            candidates.push(Candidate {
                text: s,
                segment: seg.index,
                position,
            });
        }
    }
    if candidates.is_empty() {
        return TopicSummary {
            topic_id,
            sentences: Vec::new(),
            method: SummaryMethod::TfidfCentroid,
            empty: true,
        };
    }

    let filtered: Vec<Vec<String>> = candidates
        .iter()
        .map(|c| {
            text::tokens(c.text, 2)
                .into_iter()
                .filter(|t| !stopwords.contains(t))
                .collect()
        })
        .collect();
    let vocabulary_empty = filtered.iter().all(Vec::is_empty);

    let (scores, method) = if vocabulary_empty {
        (frequency_scores(&candidates), SummaryMethod::TokenFrequencyFallback)
    } else {
        (centroid_scores(&filtered), SummaryMethod::TfidfCentroid)
    };

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(candidates[a].segment.cmp(&candidates[b].segment))
            .then(candidates[a].position.cmp(&candidates[b].position))
    });
    let sentences = order
        .into_iter()
        .take(k_max)
        .map(|i| SummarySentence {
            text: candidates[i].text.to_string(),
            score: scores[i],
            segment: candidates[i].segment,
        })
        .collect();
    TopicSummary {
        topic_id,
        sentences,
        method,
        empty: false,
    }
}

/// Cosine of each sentence's `tf * ln(N / df)` vector with the mean of the
/// L2-normalized sentence vectors.
fn centroid_scores(docs: &[Vec<String>]) -> Vec<f64> {
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        for t in d.iter().map(String::as_str).collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1;
        }
    }
    let vectors: Vec<BTreeMap<&str, f64>> = docs
        .iter()
        .map(|d| {
            let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
            for t in d {
                *tf.entry(t.as_str()).or_default() += 1.0;
            }
            tf.into_iter()
                .map(|(t, c)| (t, c * (n / df[t] as f64).ln()))
                .collect()
        })
        .collect();
    let mut centroid: BTreeMap<&str, f64> = BTreeMap::new();
    for v in &vectors {
        let vn = v.values().map(|w| w * w).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for (&t, &w) in v {
            *centroid.entry(t).or_default() += w / vn / n;
        }
    }
    let cn = centroid.values().map(|w| w * w).sum::<f64>().sqrt();
    vectors
        .iter()
        .map(|v| {
            let vn = v.values().map(|w| w * w).sum::<f64>().sqrt();
            if vn == 0.0 || cn == 0.0 {
                return 0.0;
            }
            let dot: f64 = v.iter().map(|(t, w)| w * centroid.get(t).copied().unwrap_or(0.0)).sum();
            dot / (vn * cn)
        })
        .collect()
}

/// Summed topic-corpus frequencies of each sentence's words, scaled so the
/// best sentence scores 1.
fn frequency_scores(candidates: &[Candidate<'_>]) -> Vec<f64> {
    let words: Vec<Vec<String>> = candidates.iter().map(|c| text::words(c.text)).collect();
    let mut freq: BTreeMap<&str, f64> = BTreeMap::new();
    for w in words.iter().flatten() {
        *freq.entry(w.as_str()).or_default() += 1.0;
    }
    let raw: Vec<f64> = words
        .iter()
        .map(|ws| ws.iter().map(|w| freq[w.as_str()]).sum())
        .collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        raw.into_iter().map(|s| s / max).collect()
    } else {
        raw
    }
}
