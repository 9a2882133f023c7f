//! Guided seeding: pull text embeddings toward the nearest seed-topic centroid.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::WordVectorTable;
use crate::scalar::{self, Scalar};
use crate::text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedTopic<F> {
    pub name: String,
    pub words: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec<F>>,
}

/// The fifteen default seed themes.
pub fn default_seed_topics<F: Scalar>() -> Vec<SeedTopic<F>> {
    const SEEDS: [(&str, [&str; 4]); 15] = [
        ("War & conflict", ["war", "conflict", "battle", "army"]),
        ("Democracy", ["democracy", "freedom", "election", "parliament"]),
        ("Peace & history", ["peace", "reconciliation", "memory", "history"]),
        ("Economy", ["economy", "trade", "market", "growth"]),
        ("Climate", ["climate", "environment", "sustainability", "green"]),
        ("Technology", ["technology", "innovation", "digital", "future"]),
        ("Health", ["health", "medicine", "pandemic", "vaccine"]),
        ("Culture", ["culture", "art", "music", "literature"]),
        ("Sports", ["sports", "competition", "athlete", "tournament"]),
        ("Education", ["education", "school", "university", "learning"]),
        ("Human rights", ["human rights", "justice", "equality", "activism"]),
        ("Migration", ["migration", "refugee", "border", "asylum"]),
        ("Science", ["science", "research", "discovery", "experiment"]),
        ("Space", ["space", "astronomy", "exploration", "universe"]),
        ("Leadership", ["leadership", "governance", "policy", "diplomacy"]),
    ];
    SEEDS
        .iter()
        .map(|(name, words)| SeedTopic {
            name: name.to_string(),
            words: words.iter().map(|w| w.to_string()).collect(),
            centroid: None,
        })
        .collect()
}

/// A seed with a unit-norm centroid in text-embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSeed<F> {
    pub name: String,
    pub centroid: Vec<F>,
}

/// Resolves seed centroids: a supplied centroid wins, otherwise the mean of
/// the seed words' vectors (multi-word entries contribute each word).
pub fn resolve_seeds<F: Scalar>(
    seeds: &[SeedTopic<F>],
    table: Option<&WordVectorTable<F>>,
    dims: usize,
) -> Result<Vec<ResolvedSeed<F>>> {
    seeds
        .iter()
        .map(|seed| {
            if seed.words.is_empty() {
                return Err(Error::Config(format!("seed {:?} has no words", seed.name)));
            }
            let mut centroid = match (&seed.centroid, table) {
                (Some(c), _) => c.clone(),
                (None, Some(table)) => {
                    let vectors: Vec<&[F]> = seed
                        .words
                        .iter()
                        .flat_map(|w| match table.get(&w.to_lowercase()) {
                            Some(v) => vec![v],
                            None => text::words(w).iter().filter_map(|t| table.get(t)).collect(),
                        })
                        .collect();
                    if vectors.is_empty() {
                        return Err(Error::Config(format!(
                            "no seed word of {:?} is in the word-vector table",
                            seed.name
                        )));
                    }
                    crate::linalg::column_mean(&vectors, table.dims())
                }
                (None, None) => {
                    return Err(Error::Config(format!(
                        "seed {:?} has no centroid and no word-vector table is configured",
                        seed.name
                    )))
                }
            };
            if centroid.len() != dims {
                return Err(Error::Dimension(format!(
                    "seed {:?} centroid has {} dims, text embeddings have {dims}",
                    seed.name,
                    centroid.len()
                )));
            }
            scalar::normalize_in_place(&mut centroid);
            Ok(ResolvedSeed {
                name: seed.name.clone(),
                centroid,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blended<F> {
    pub embeddings: Array2<F>,
    /// Index into the seed list for every blended row.
    pub matched: Vec<Option<usize>>,
}

/// For each row, find the most similar centroid; at or above `threshold`
/// replace the row by the normalized midpoint of its unit direction and the
/// centroid. Rows below threshold are left untouched.
pub fn guided_blend<F: Scalar>(
    text: ArrayView2<'_, F>,
    seeds: &[ResolvedSeed<F>],
    threshold: F,
) -> Blended<F> {
    let mut embeddings = text.to_owned();
    let mut matched = vec![None; text.nrows()];
    if seeds.is_empty() {
        return Blended { embeddings, matched };
    }
    for (i, mut row) in embeddings.rows_mut().into_iter().enumerate() {
        let mut unit = row.to_vec();
        scalar::normalize_in_place(&mut unit);
        let mut best = (0usize, F::neg_infinity());
        for (j, s) in seeds.iter().enumerate() {
            let c = scalar::dot(&unit, &s.centroid);
            if c > best.1 {
                best = (j, c);
            }
        }
        if best.1 >= threshold && scalar::norm(&unit) > F::zero() {
            let c = &seeds[best.0].centroid;
            let mut mid: Vec<F> = unit
                .iter()
                .zip(c)
                .map(|(&x, &y)| (x + y) * F::lit(0.5))
                .collect();
            scalar::normalize_in_place(&mut mid);
            row.iter_mut().zip(&mid).for_each(|(o, &v)| *o = v);
            matched[i] = Some(best.0);
        }
    }
    Blended { embeddings, matched }
}
