//! Topic discovery, summaries, diagnostics and metrics for one loaded video.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use vidtopic_core::cluster::{
    assign_topics, resolve_seeds, AssignOptions, ClusterParams, EmbeddingSource, MergeEvent,
    SeedTopic, TopicModel,
};
use vidtopic_core::corpus::{Modality, Segment, VideoCorpus};
use vidtopic_core::diagnostics::{speaker_style_labels, SpeakerLabel};
use vidtopic_core::fusion::{FusionWeights, GateRecord};
use vidtopic_core::metrics::{
    cluster_validity, iec, npmi, structure_metrics, topic_diversity, we_alignment,
    TransitionOptions, VideoMetrics, WordVectorTable, NPMI_EPSILON,
};
use vidtopic_core::refine::{summarize_topic, SummaryMethod, SummarySentence};
use vidtopic_core::text::Stopwords;

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};

/// Everything the per-video stages need, resolved once per run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub mode: EmbeddingSource,
    pub cluster: ClusterParams<f64>,
    pub weights: FusionWeights<f64>,
    pub seeds: Vec<SeedTopic<f64>>,
    pub word_vectors: Option<Arc<WordVectorTable<f64>>>,
    pub stopwords: Stopwords,
    pub summary_k: usize,
    pub diagnostics: Option<ClusterParams<f64>>,
    pub eval_spaces: Vec<Modality>,
    pub transitions: TransitionOptions,
}

impl Settings {
    /// Reference defaults for `mode`, no seeds, no diagnostics.
    pub fn new(mode: EmbeddingSource) -> Self {
        Settings {
            mode,
            cluster: ClusterParams::default(),
            weights: FusionWeights::default(),
            seeds: Vec::new(),
            word_vectors: None,
            stopwords: Stopwords::default(),
            summary_k: 4,
            diagnostics: None,
            eval_spaces: mode.required().to_vec(),
            transitions: TransitionOptions::default(),
        }
    }

    pub fn from_config(c: &PipelineConfig) -> Result<Self> {
        let word_vectors = match &c.word_vectors {
            Some(p) => Some(Arc::new(WordVectorTable::load(&c.resolve(p))?)),
            None => None,
        };
        let stopwords = match &c.stopwords {
            Some(p) => Stopwords::load(&c.resolve(p))?,
            None => Stopwords::default(),
        };
        Ok(Settings {
            mode: c.mode,
            cluster: c.topic_model.params(),
            weights: c.fusion_weights,
            seeds: c.seed_topics()?,
            word_vectors,
            stopwords,
            summary_k: c.summary.k_max,
            diagnostics: c.diagnostics.enabled.then(|| c.diagnostics.params()),
            eval_spaces: c.evaluation_spaces(),
            transitions: TransitionOptions {
                exclude_outliers: c.evaluation.exclude_outlier_transitions,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordWeight {
    pub word: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub id: usize,
    pub size: usize,
    pub seed: Option<String>,
    pub top_words: Vec<WordWeight>,
    pub summary: Vec<SummarySentence>,
    pub summary_method: SummaryMethod,
}

/// Per-video topic document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsDoc {
    pub video_id: String,
    pub mode: EmbeddingSource,
    pub reducer: String,
    pub n_segments: usize,
    pub n_topics: usize,
    pub outliers: usize,
    pub labels: Vec<i64>,
    pub topics: Vec<TopicEntry>,
    pub merge_log: Vec<MergeEvent>,
}

#[derive(Debug, Clone)]
pub struct VideoAnalysis {
    pub video_id: String,
    pub model: TopicModel,
    pub topics: TopicsDoc,
    /// The matrix that was clustered.
    pub clustered: Array2<f64>,
    pub gates: Option<Vec<GateRecord<f64>>>,
    pub speakers: Option<Vec<SpeakerLabel>>,
    pub metrics: VideoMetrics,
    pub warnings: Vec<String>,
    /// Milliseconds per stage.
    pub timings: BTreeMap<String, f64>,
}

struct Clock(BTreeMap<String, f64>, Instant);

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0.insert(stage.into(), (now - self.1).as_secs_f64() * 1e3);
        self.1 = now;
    }
}

/// Only the modalities of `mode`, so topic discovery cannot read any other.
fn restrict(corpus: &VideoCorpus, mode: EmbeddingSource) -> Result<VideoCorpus> {
    let mut out = VideoCorpus::new(corpus.video_id.clone(), corpus.segments.clone());
    for &m in mode.required() {
        out.attach(corpus.require(m)?.clone())?;
    }
    Ok(out)
}

pub fn analyze_video(corpus: &VideoCorpus, s: &Settings) -> Result<VideoAnalysis> {
    let mut clock = Clock(BTreeMap::new(), Instant::now());
    let topic_corpus = restrict(corpus, s.mode)?;
    let text_dims = topic_corpus.require(Modality::Text)?.dims;
    let seeds = resolve_seeds(&s.seeds, s.word_vectors.as_deref(), text_dims)?;
    let options = AssignOptions {
        seeds,
        stopwords: s.stopwords.clone(),
        weights: s.weights,
    };
    let run = assign_topics(&topic_corpus, &s.cluster, s.mode, &options)?;
    let mut warnings = run.warnings.clone();
    clock.lap("assign_topics");

    let model = run.model;
    let mut topics = Vec::with_capacity(model.n_topics());
    for t in &model.topics {
        let members: Vec<&Segment> = corpus
            .segments
            .iter()
            .zip(&model.labels)
            .filter(|(_, &l)| l == t.id as i64)
            .map(|(seg, _)| seg)
            .collect();
        let summary = summarize_topic(t.id, &members, s.summary_k, &s.stopwords);
        if summary.empty {
            warnings.push(format!("topic {} has no text to summarize", t.id));
        }
        topics.push(TopicEntry {
            id: t.id,
            size: t.size,
            seed: t.seed.clone(),
            top_words: t
                .top_words
                .iter()
                .map(|(word, weight)| WordWeight {
                    word: word.clone(),
                    weight: *weight,
                })
                .collect(),
            summary: summary.sentences,
            summary_method: summary.method,
        });
    }
    clock.lap("refine");

    let speakers = match &s.diagnostics {
        Some(p) => {
            let audio = corpus.get(Modality::Audio).ok_or_else(|| {
                PipelineError::Config("diagnostics need audio embeddings".into())
            })?;
            Some(speaker_style_labels(audio, p)?)
        }
        None => None,
    };
    clock.lap("diagnostics");

    let metrics = video_metrics(corpus, &model, &run.input.embeddings, s);
    clock.lap("metrics");

    let doc = TopicsDoc {
        video_id: corpus.video_id.clone(),
        mode: s.mode,
        reducer: run.reducer.to_string(),
        n_segments: corpus.len(),
        n_topics: model.n_topics(),
        outliers: model.outliers(),
        labels: model.labels.clone(),
        topics,
        merge_log: model.merge_log.clone(),
    };
    Ok(VideoAnalysis {
        video_id: corpus.video_id.clone(),
        model,
        topics: doc,
        clustered: run.input.embeddings,
        gates: run.input.gates,
        speakers,
        metrics,
        warnings,
        timings: clock.0,
    })
}

/// Scores a labelling in every evaluation space present in `corpus`, plus
/// the clustered space under `fused`.
pub fn video_metrics(
    corpus: &VideoCorpus,
    model: &TopicModel,
    clustered: &Array2<f64>,
    s: &Settings,
) -> VideoMetrics {
    let labels = &model.labels;
    let structure = structure_metrics(labels, &[labels.len()], s.transitions);
    let mut validity = BTreeMap::new();
    let mut coherence = BTreeMap::new();
    for &m in &s.eval_spaces {
        if let Some(em) = corpus.get(m) {
            let x = em.to_array::<f64>();
            validity.insert(m.to_string(), cluster_validity(x.view(), labels, m.as_str()));
            coherence.insert(m.to_string(), iec(x.view(), labels));
        }
    }
    validity.insert("fused".into(), cluster_validity(clustered.view(), labels, "fused"));
    coherence.insert("fused".into(), iec(clustered.view(), labels));

    let words: Vec<Vec<String>> = model
        .topics
        .iter()
        .map(|t| t.top_words.iter().map(|(w, _)| w.clone()).collect())
        .collect();
    let docs: Vec<&str> = corpus.segments.iter().map(|s| s.text.as_str()).collect();
    VideoMetrics {
        structure,
        validity,
        npmi: npmi(&words, &docs, NPMI_EPSILON),
        diversity: topic_diversity(&words, s.cluster.top_k_words),
        we: s.word_vectors.as_deref().map(|t| we_alignment(&words, t)),
        iec: coherence,
    }
}
