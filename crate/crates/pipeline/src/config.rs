//! YAML run configuration.
//!
//! Relative paths are resolved against the directory of the config file.
//! Unknown keys are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vidtopic_core::cluster::guided::default_seed_topics;
use vidtopic_core::cluster::{ClusterParams, EmbeddingSource, SeedTopic};
use vidtopic_core::corpus::Modality;
use vidtopic_core::fusion::FusionWeights;
use vidtopic_core::frameselect::SelectionParams;

use crate::error::{PipelineError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_mode")]
    pub mode: EmbeddingSource,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub videos: Vec<VideoSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_vectors: Option<PathBuf>,
    #[serde(default, with = "serde_yaml::with::singleton_map")]
    pub seeds: SeedsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub fusion_weights: FusionWeights<f64>,
    #[serde(default)]
    pub frame_selection: SelectionParams<f64>,
    #[serde(default)]
    pub topic_model: TopicModelConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub summary: SummaryConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub http: HttpConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_mode() -> EmbeddingSource {
    EmbeddingSource::Full
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoSpec {
    pub id: String,
    pub segments: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual: Option<SourceSpec>,
}

impl VideoSpec {
    pub fn source(&self, m: Modality) -> Option<&SourceSpec> {
        match m {
            Modality::Text => self.text.as_ref(),
            Modality::Audio => self.audio.as_ref(),
            Modality::Visual => self.visual.as_ref(),
            _ => None,
        }
    }
}

/// Where one modality's embeddings come from.
///
/// Exactly one of `file` and `endpoint` is set. With `frames`, the visual
/// rows are per frame (aligned with the video's manifest lines for `file`,
/// or with the selected frames for `endpoint`) and get pooled per segment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Frame manifest (visual only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<PathBuf>,
    /// Media file whose spans are sent to an audio endpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedsConfig {
    #[default]
    None,
    /// The built-in fifteen themes.
    Default,
    /// YAML or JSON list of `{name, words, centroid?}`.
    File(PathBuf),
    Inline(Vec<SeedTopic<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicModelConfig {
    pub min_topic_size: usize,
    pub merge_similarity_threshold: f64,
    pub top_n_words: usize,
    pub reducer: ReducerConfig,
    pub hdbscan: HdbscanConfig,
    pub seed_blend_threshold: f64,
    pub min_doc_freq: usize,
    pub min_token_chars: usize,
}

impl Default for TopicModelConfig {
    fn default() -> Self {
        let p = ClusterParams::<f64>::default();
        TopicModelConfig {
            min_topic_size: p.min_cluster_size,
            merge_similarity_threshold: p.merge_threshold,
            top_n_words: p.top_k_words,
            reducer: ReducerConfig::default(),
            hdbscan: HdbscanConfig::default(),
            seed_blend_threshold: p.seed_blend_threshold,
            min_doc_freq: p.min_doc_freq,
            min_token_chars: p.min_token_chars,
        }
    }
}

impl TopicModelConfig {
    pub fn params(&self) -> ClusterParams<f64> {
        ClusterParams {
            reducer_components: self.reducer.n_components,
            reducer_neighbors: self.reducer.n_neighbors,
            min_cluster_size: self.hdbscan.min_cluster_size,
            merge_threshold: self.merge_similarity_threshold,
            top_k_words: self.top_n_words,
            min_doc_freq: self.min_doc_freq,
            min_token_chars: self.min_token_chars,
            seed_blend_threshold: self.seed_blend_threshold,
        }
    }

    fn validate(&self, section: &str) -> Result<()> {
        self.reducer.validate(section)?;
        self.hdbscan.validate(section)?;
        if self.min_topic_size != self.hdbscan.min_cluster_size {
            return Err(config(format!(
                "{section}.min_topic_size ({}) must equal {section}.hdbscan.min_cluster_size ({})",
                self.min_topic_size, self.hdbscan.min_cluster_size
            )));
        }
        self.params().validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReducerConfig {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub metric: String,
}

impl Default for ReducerConfig {
    fn default() -> Self {
        ReducerConfig {
            n_neighbors: 15,
            n_components: 8,
            metric: "cosine".into(),
        }
    }
}

impl ReducerConfig {
    fn validate(&self, section: &str) -> Result<()> {
        if self.metric != "cosine" {
            return Err(config(format!(
                "{section}.reducer.metric {:?} is not supported (cosine only)",
                self.metric
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HdbscanConfig {
    pub min_cluster_size: usize,
    pub metric: String,
}

impl Default for HdbscanConfig {
    fn default() -> Self {
        HdbscanConfig {
            min_cluster_size: 5,
            metric: "euclidean".into(),
        }
    }
}

impl HdbscanConfig {
    fn validate(&self, section: &str) -> Result<()> {
        if self.metric != "euclidean" {
            return Err(config(format!(
                "{section}.hdbscan.metric {:?} is not supported (euclidean only)",
                self.metric
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub enabled: bool,
    pub reducer: ReducerConfig,
    pub hdbscan: HdbscanConfig,
}

impl DiagnosticsConfig {
    pub fn params(&self) -> ClusterParams<f64> {
        ClusterParams {
            reducer_components: self.reducer.n_components,
            reducer_neighbors: self.reducer.n_neighbors,
            min_cluster_size: self.hdbscan.min_cluster_size,
            ..ClusterParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummaryConfig {
    pub k_max: usize,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig { k_max: 4 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Extra modality spaces to score; the clustered space is always scored
    /// as `fused`. Defaults to the modalities the mode uses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spaces: Option<Vec<Modality>>,
    pub exclude_outlier_transitions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub attempts: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            attempts: 3,
            backoff_ms: 250,
            timeout_secs: 120,
        }
    }
}

fn config(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl PipelineConfig {
    pub fn from_yaml(src: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut c: PipelineConfig =
            serde_yaml::from_str(src).map_err(|e| config(e.to_string()))?;
        c.base_dir = base_dir.into();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_yaml(&src, base)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Modalities scored besides the clustered space.
    pub fn evaluation_spaces(&self) -> Vec<Modality> {
        match &self.evaluation.spaces {
            Some(s) => {
                let set: BTreeSet<Modality> = s.iter().copied().collect();
                set.into_iter().collect()
            }
            None => self.mode.required().to_vec(),
        }
    }

    /// Modalities that must be loaded for each video.
    pub fn needed_modalities(&self) -> Vec<Modality> {
        let mut set: BTreeSet<Modality> = self.mode.required().iter().copied().collect();
        set.extend(self.evaluation_spaces());
        if self.diagnostics.enabled {
            set.insert(Modality::Audio);
        }
        set.into_iter().collect()
    }

    pub fn seed_topics(&self) -> Result<Vec<SeedTopic<f64>>> {
        match &self.seeds {
            SeedsConfig::None => Ok(Vec::new()),
            SeedsConfig::Default => Ok(default_seed_topics()),
            SeedsConfig::Inline(s) => Ok(s.clone()),
            SeedsConfig::File(p) => {
                let path = self.resolve(p);
                let src = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
                serde_yaml::from_str(&src).map_err(|e| PipelineError::decode(&path, e))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.videos.is_empty() {
            return Err(config("no videos configured"));
        }
        if self.workers == Some(0) {
            return Err(config("workers must be at least 1"));
        }
        let mut ids = BTreeSet::new();
        for v in &self.videos {
            if v.id.is_empty() || v.id.contains(['/', '\\']) || v.id.starts_with('.') {
                return Err(config(format!("video id {:?} is not a valid directory name", v.id)));
            }
            if !ids.insert(v.id.as_str()) {
                return Err(config(format!("duplicate video id {:?}", v.id)));
            }
            for m in self.needed_modalities() {
                let Some(src) = v.source(m) else {
                    return Err(config(format!("video {:?}: {m} embeddings are required", v.id)));
                };
                validate_source(&v.id, m, src)?;
            }
        }
        self.fusion_weights.validate()?;
        self.frame_selection.validate()?;
        self.topic_model.validate("topic_model")?;
        if self.diagnostics.enabled {
            self.diagnostics.reducer.validate("diagnostics")?;
            self.diagnostics.hdbscan.validate("diagnostics")?;
            self.diagnostics.params().validate()?;
        }
        if self.summary.k_max == 0 {
            return Err(config("summary.k_max must be at least 1"));
        }
        if self.http.attempts == 0 {
            return Err(config("http.attempts must be at least 1"));
        }
        if self.word_vectors.is_none() {
            let seeds = self.seed_topics()?;
            if let Some(s) = seeds.iter().find(|s| s.centroid.is_none()) {
                return Err(config(format!(
                    "seed {:?} has no centroid and no word_vectors table is configured",
                    s.name
                )));
            }
        }
        Ok(())
    }
}

fn validate_source(video: &str, m: Modality, src: &SourceSpec) -> Result<()> {
    match (&src.file, &src.endpoint) {
        (Some(_), None) | (None, Some(_)) => {}
        _ => {
            return Err(config(format!(
                "video {video:?}: {m} needs exactly one of file and endpoint"
            )))
        }
    }
    if src.frames.is_some() && m != Modality::Visual {
        return Err(config(format!("video {video:?}: frames only apply to visual")));
    }
    if m == Modality::Visual && src.endpoint.is_some() && src.frames.is_none() {
        return Err(config(format!(
            "video {video:?}: a visual endpoint needs a frames manifest"
        )));
    }
    if src.media.is_some() && (m != Modality::Audio || src.endpoint.is_none()) {
        return Err(config(format!(
            "video {video:?}: media only applies to an audio endpoint"
        )));
    }
    Ok(())
}
