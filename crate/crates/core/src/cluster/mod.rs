//! Topic assignment: guided seeding, reduction, density clustering,
//! c-TF-IDF representation and topic merging.

pub mod ctfidf;
pub mod guided;
pub mod hdbscan;
pub mod reduce;

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::{Modality, VideoCorpus};
use crate::error::{Error, Result};
use crate::fusion::{self, FusionWeights, GateRecord};
use crate::scalar::Scalar;
use crate::text::Stopwords;

pub use ctfidf::{TermCounts, TermWeights};
pub use guided::{guided_blend, resolve_seeds, ResolvedSeed, SeedTopic};
pub use hdbscan::{density_cluster, Hdbscan, NOISE};
pub use reduce::{PcaModel, PcaReducer, Reducer, Reduction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams<F> {
    pub reducer_components: usize,
    /// Neighbourhood size of a graph-based reducer; unused by PCA.
    pub reducer_neighbors: usize,
    pub min_cluster_size: usize,
    pub merge_threshold: F,
    pub top_k_words: usize,
    pub min_doc_freq: usize,
    pub min_token_chars: usize,
    pub seed_blend_threshold: F,
}

impl<F: Scalar> Default for ClusterParams<F> {
    fn default() -> Self {
        ClusterParams {
            reducer_components: 8,
            reducer_neighbors: 15,
            min_cluster_size: 5,
            merge_threshold: F::lit(0.70),
            top_k_words: 10,
            min_doc_freq: 2,
            min_token_chars: 2,
            seed_blend_threshold: F::lit(0.3),
        }
    }
}

impl<F: Scalar> ClusterParams<F> {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        if !(self.merge_threshold > F::zero() && self.merge_threshold <= F::one()) {
            return Err(Error::Config("merge_threshold must lie in (0, 1]".into()));
        }
        if self.reducer_components == 0 {
            return Err(Error::Config("reducer_components must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub id: usize,
    pub size: usize,
    pub counts: TermCounts,
    pub weights: TermWeights,
    pub top_words: Vec<(String, f64)>,
    pub seed: Option<String>,
    /// Every token of the topic was filtered out.
    pub empty_words: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    /// Ids as they were when the merge happened.
    pub from: usize,
    pub into: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    /// One label per segment; `-1` marks outliers.
    pub labels: Vec<i64>,
    pub topics: Vec<Topic>,
    pub merge_log: Vec<MergeEvent>,
    /// Seed matched by guided blending, per segment.
    pub row_seeds: Vec<Option<String>>,
    pub top_k: usize,
}

impl TopicModel {
    /// Builds topics from dense labels and filtered per-segment tokens.
    pub fn build(
        labels: Vec<i64>,
        docs: &[Vec<String>],
        top_k: usize,
        row_seeds: Vec<Option<String>>,
    ) -> Self {
        let n_topics = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
        let counts = ctfidf::class_counts(&labels, docs, n_topics);
        let mut sizes = vec![0usize; n_topics];
        for &l in labels.iter().filter(|&&l| l >= 0) {
            sizes[l as usize] += 1;
        }
        let topics = counts
            .into_iter()
            .zip(sizes)
            .enumerate()
            .map(|(id, (counts, size))| Topic {
                id,
                size,
                counts,
                weights: TermWeights::new(),
                top_words: Vec::new(),
                seed: None,
                empty_words: false,
            })
            .collect();
        let mut model = TopicModel {
            labels,
            topics,
            merge_log: Vec::new(),
            row_seeds,
            top_k,
        };
        model.refresh();
        model
    }

    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }

    pub fn outliers(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Recomputes weights, top words and seed matches from the pooled counts.
    fn refresh(&mut self) {
        let counts: Vec<TermCounts> = self.topics.iter().map(|t| t.counts.clone()).collect();
        let weights = ctfidf::class_weights(&counts);
        let mut seed_votes: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); self.topics.len()];
        for (&l, seed) in self.labels.iter().zip(&self.row_seeds) {
            if let (true, Some(s)) = (l >= 0, seed) {
                *seed_votes[l as usize].entry(s.as_str()).or_default() += 1;
            }
        }
        let seeds: Vec<Option<String>> = seed_votes
            .iter()
            .map(|votes| {
                votes
                    .iter()
                    .fold(None::<(&str, usize)>, |best, (&s, &n)| match best {
                        Some((_, bn)) if bn >= n => best,
                        _ => Some((s, n)),
                    })
                    .map(|(s, _)| s.to_string())
            })
            .collect();
        for ((topic, w), seed) in self.topics.iter_mut().zip(weights).zip(seeds) {
            topic.top_words = ctfidf::top_words(&w, self.top_k);
            topic.empty_words = topic.top_words.is_empty();
            topic.weights = w;
            topic.seed = seed;
        }
    }
}

/// Greedily merges the most similar pair of topics while their c-TF-IDF
/// cosine exceeds `threshold`. The smaller topic is absorbed (ties: the
/// lower id absorbs) and ids are renumbered densely after each merge.
pub fn merge_topics(model: &TopicModel, threshold: f64) -> TopicModel {
    let mut m = model.clone();
    loop {
        let t = m.topics.len();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..t {
            for j in (i + 1)..t {
                let s = ctfidf::sparse_cosine(&m.topics[i].weights, &m.topics[j].weights);
                if best.map_or(true, |(_, _, b)| s > b) {
                    best = Some((i, j, s));
                }
            }
        }
        let Some((i, j, sim)) = best else { break };
        if sim <= threshold {
            break;
        }
        let (into, from) = if m.topics[j].size > m.topics[i].size {
            (j, i)
        } else {
            (i, j)
        };
        m.merge_log.push(MergeEvent {
            from,
            into,
            similarity: sim,
        });
        let absorbed = m.topics.remove(from);
        let into_now = if into > from { into - 1 } else { into };
        let target = &mut m.topics[into_now];
        target.size += absorbed.size;
        for (term, c) in absorbed.counts {
            *target.counts.entry(term).or_default() += c;
        }
        for l in m.labels.iter_mut() {
            if *l < 0 {
                continue;
            }
            let old = *l as usize;
            let new = if old == from { into_now } else if old > from { old - 1 } else { old };
            *l = new as i64;
        }
        for (id, topic) in m.topics.iter_mut().enumerate() {
            topic.id = id;
        }
        m.refresh();
    }
    m
}

/// Which embedding feeds topic assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    TextOnly,
    TextAudio,
    TextVisual,
    Full,
}

impl EmbeddingSource {
    pub fn required(self) -> &'static [Modality] {
        match self {
            EmbeddingSource::TextOnly => &[Modality::Text],
            EmbeddingSource::TextAudio => &[Modality::Text, Modality::Audio],
            EmbeddingSource::TextVisual => &[Modality::Text, Modality::Visual],
            EmbeddingSource::Full => &[Modality::Text, Modality::Audio, Modality::Visual],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingSource::TextOnly => "text_only",
            EmbeddingSource::TextAudio => "text_audio",
            EmbeddingSource::TextVisual => "text_visual",
            EmbeddingSource::Full => "full",
        }
    }
}

impl std::str::FromStr for EmbeddingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text_only" => Ok(EmbeddingSource::TextOnly),
            "text_audio" => Ok(EmbeddingSource::TextAudio),
            "text_visual" => Ok(EmbeddingSource::TextVisual),
            "full" => Ok(EmbeddingSource::Full),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Inputs to topic assignment beyond the corpus itself.
#[derive(Debug, Clone, Default)]
pub struct AssignOptions {
    pub seeds: Vec<ResolvedSeed<f64>>,
    pub stopwords: Stopwords,
    pub weights: FusionWeights<f64>,
}

/// The embedding actually clustered, plus fusion diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicInput {
    pub embeddings: Array2<f64>,
    pub gates: Option<Vec<GateRecord<f64>>>,
    pub matched_seeds: Vec<Option<usize>>,
}

/// Guided blending in text space, then the per-mode combination.
pub fn build_input(
    corpus: &VideoCorpus,
    source: EmbeddingSource,
    options: &AssignOptions,
    blend_threshold: f64,
) -> Result<TopicInput> {
    for &m in source.required() {
        corpus.require(m)?;
    }
    let text = corpus.require(Modality::Text)?.to_array::<f64>();
    let blended = guided_blend(text.view(), &options.seeds, blend_threshold);
    let text = blended.embeddings;
    let load = |m: Modality| -> Result<Array2<f64>> { Ok(corpus.require(m)?.to_array()) };
    let (embeddings, gates) = match source {
        EmbeddingSource::TextOnly => (text, None),
        EmbeddingSource::TextAudio => {
            (fusion::concat_matrices(text.view(), load(Modality::Audio)?.view())?, None)
        }
        EmbeddingSource::TextVisual => {
            (fusion::concat_matrices(text.view(), load(Modality::Visual)?.view())?, None)
        }
        EmbeddingSource::Full => {
            let a = load(Modality::Audio)?;
            let v = load(Modality::Visual)?;
            let (fused, gates) =
                fusion::fuse_matrices(text.view(), a.view(), v.view(), &options.weights)?;
            (fused, Some(gates))
        }
    };
    Ok(TopicInput {
        embeddings,
        gates,
        matched_seeds: blended.matched,
    })
}

#[derive(Debug, Clone)]
pub struct TopicRun {
    pub model: TopicModel,
    pub input: TopicInput,
    pub reducer: &'static str,
    pub warnings: Vec<String>,
}

pub fn assign_topics(
    corpus: &VideoCorpus,
    params: &ClusterParams<f64>,
    source: EmbeddingSource,
    options: &AssignOptions,
) -> Result<TopicRun> {
    let reducer = PcaReducer {
        components: params.reducer_components,
    };
    assign_topics_with(corpus, params, source, options, &reducer)
}

/// Same as [`assign_topics`] with an explicit reducer.
pub fn assign_topics_with<R: Reducer<f64>>(
    corpus: &VideoCorpus,
    params: &ClusterParams<f64>,
    source: EmbeddingSource,
    options: &AssignOptions,
    reducer: &R,
) -> Result<TopicRun> {
    params.validate()?;
    let input = build_input(corpus, source, options, params.seed_blend_threshold)?;
    let mut warnings = Vec::new();
    let reduced = reducer.reduce(input.embeddings.view())?;
    warnings.extend(reduced.warning);
    let labels = density_cluster(reduced.embedding.view(), params.min_cluster_size);

    let docs = ctfidf::tokenize_documents(
        &corpus.segments,
        params.min_token_chars,
        params.min_doc_freq,
        &options.stopwords,
    );
    let row_seeds = input
        .matched_seeds
        .iter()
        .map(|m| m.map(|j| options.seeds[j].name.clone()))
        .collect();
    let model = TopicModel::build(labels, &docs, params.top_k_words, row_seeds);
    let model = merge_topics(&model, params.merge_threshold);
    for t in model.topics.iter().filter(|t| t.empty_words) {
        warnings.push(format!("topic {} has no words after filtering", t.id));
    }
    Ok(TopicRun {
        model,
        input,
        reducer: reducer.name(),
        warnings,
    })
}
