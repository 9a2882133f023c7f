//! End-to-end runs over every configured video and the on-disk reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vidtopic_core::cluster::EmbeddingSource;
use vidtopic_core::corpus::{write_embeddings, EmbeddingMatrix, Modality};
use vidtopic_core::fusion::GateRecord;
use vidtopic_core::metrics::{aggregate, formula_definitions, AggregateValue, VideoMetrics};

use crate::analyze::{analyze_video, Settings, TopicsDoc, VideoAnalysis};
use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::load::{load_video, LoadedVideo, SelectedFrame};

pub const TOOL: &str = "vidtopic";
pub const REDUCER_NOTE: &str =
    "PCA on L2-normalized rows stands in for a neighbour-graph reducer; components and metric as configured";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub topic: i64,
    pub seed: Option<String>,
    pub speaker: Option<i64>,
    pub gate: Option<f64>,
    pub frames: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: EmbeddingSource,
    pub videos: BTreeMap<String, VideoMetrics>,
    pub aggregate: BTreeMap<String, AggregateValue>,
    pub definitions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VideoStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub status: VideoStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub input_hashes: BTreeMap<String, String>,
    pub mode: EmbeddingSource,
    pub reducer: String,
    pub reducer_note: String,
    pub workers: usize,
    pub videos: Vec<VideoRecord>,
    pub total_ms: f64,
    pub formula_definitions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.videos
            .iter()
            .filter(|v| v.status == VideoStatus::Failed)
            .count()
    }
}

/// A successfully processed video.
#[derive(Debug, Clone)]
pub struct VideoOutput {
    pub analysis: VideoAnalysis,
    pub timeline: Vec<TimelineEntry>,
    pub frames: Vec<SelectedFrame>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub videos: Vec<VideoOutput>,
    pub metrics: MetricsReport,
    pub manifest: RunManifest,
}

fn definitions() -> BTreeMap<String, String> {
    formula_definitions()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn timeline(loaded: &LoadedVideo, a: &VideoAnalysis) -> Vec<TimelineEntry> {
    let gate_of = |i: usize| -> Option<f64> {
        a.gates.as_ref().map(|g: &Vec<GateRecord<f64>>| g[i].s)
    };
    loaded
        .corpus
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| TimelineEntry {
            index: seg.index,
            start: seg.t_start,
            end: seg.t_end,
            topic: a.model.labels[i],
            seed: a.model.row_seeds[i].clone(),
            speaker: a.speakers.as_ref().map(|s| s[i].label),
            gate: gate_of(i),
            frames: loaded.frames[i].iter().map(|f| f.path.clone()).collect(),
        })
        .collect()
}

struct Attempt {
    id: String,
    result: Result<(LoadedVideo, VideoAnalysis)>,
    elapsed_ms: f64,
}

/// Runs every video on a bounded pool. A failing video is recorded and
/// skipped; the others still complete.
pub fn run(config: &PipelineConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let settings = Settings::from_config(config)?;
    let workers = config.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;

    let attempts: Vec<Attempt> = pool.install(|| {
        config
            .videos
            .par_iter()
            .map(|spec| {
                let t0 = Instant::now();
                let result = load_video(config, spec).and_then(|loaded| {
                    let load_ms = t0.elapsed().as_secs_f64() * 1e3;
                    let mut a = analyze_video(&loaded.corpus, &settings)?;
                    a.timings.insert("load".into(), load_ms);
                    Ok((loaded, a))
                });
                if let Err(e) = &result {
                    warn!("video {}: {e}", spec.id);
                }
                Attempt {
                    id: spec.id.clone(),
                    result,
                    elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
                }
            })
            .collect()
    });

    let mut videos = Vec::new();
    let mut records = Vec::new();
    let mut input_hashes = BTreeMap::new();
    for at in attempts {
        match at.result {
            Ok((loaded, analysis)) => {
                for (k, v) in &loaded.input_hashes {
                    input_hashes.insert(format!("{}:{k}", at.id), v.clone());
                }
                let mut warnings = loaded.warnings.clone();
                warnings.extend(analysis.warnings.iter().cloned());
                let mut timings = analysis.timings.clone();
                timings.insert("total".into(), at.elapsed_ms);
                records.push(VideoRecord {
                    id: at.id,
                    status: VideoStatus::Ok,
                    error: None,
                    warnings,
                    timings_ms: timings,
                });
                videos.push(VideoOutput {
                    timeline: timeline(&loaded, &analysis),
                    frames: loaded.frames.into_iter().flatten().collect(),
                    analysis,
                });
            }
            Err(e) => records.push(VideoRecord {
                id: at.id,
                status: VideoStatus::Failed,
                error: Some(e.to_string()),
                warnings: Vec::new(),
                timings_ms: BTreeMap::from([("total".into(), at.elapsed_ms)]),
            }),
        }
    }

    let metrics = metrics_report(settings.mode, videos.iter().map(|v| &v.analysis));
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config.hash(),
        input_hashes,
        mode: settings.mode,
        reducer: "pca-cosine".into(),
        reducer_note: REDUCER_NOTE.into(),
        workers,
        videos: records,
        total_ms: started.elapsed().as_secs_f64() * 1e3,
        formula_definitions: definitions(),
    };
    info!(
        "{} of {} videos processed",
        videos.len(),
        config.videos.len()
    );
    Ok(RunOutput {
        videos,
        metrics,
        manifest,
    })
}

pub fn metrics_report<'a>(
    mode: EmbeddingSource,
    analyses: impl Iterator<Item = &'a VideoAnalysis>,
) -> MetricsReport {
    let per_video: BTreeMap<String, VideoMetrics> = analyses
        .map(|a| (a.video_id.clone(), a.metrics.clone()))
        .collect();
    let flat: Vec<_> = per_video.values().map(VideoMetrics::flatten).collect();
    MetricsReport {
        mode,
        aggregate: aggregate(&flat),
        videos: per_video,
        definitions: definitions(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| PipelineError::io(path, e))
}

/// Writes per-video documents under `<dir>/<video_id>/` and the run-level
/// `metrics.json` and `manifest.json`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    for v in &out.videos {
        let a = &v.analysis;
        let vdir = dir.join(&a.video_id);
        fs::create_dir_all(&vdir).map_err(|e| PipelineError::io(&vdir, e))?;
        write_json(&vdir.join("topics.json"), &a.topics)?;
        write_json(&vdir.join("timeline.json"), &v.timeline)?;
        let fused = EmbeddingMatrix::from_array(Modality::Fused, out.manifest.mode.as_str(), &a.clustered)?;
        write_embeddings(&vdir.join("fused.emb1"), &fused)?;
        if let Some(g) = &a.gates {
            write_json(&vdir.join("gates.json"), g)?;
        }
        if !v.frames.is_empty() {
            let path = vdir.join("selected_frames.jsonl");
            let mut f = fs::File::create(&path).map_err(|e| PipelineError::io(&path, e))?;
            for fr in &v.frames {
                let line = serde_json::to_string(fr).expect("frame serializes");
                writeln!(f, "{line}").map_err(|e| PipelineError::io(&path, e))?;
            }
        }
    }
    write_json(&dir.join("metrics.json"), &out.metrics)?;
    write_json(&dir.join("manifest.json"), &out.manifest)
}

/// Reads back a topic document.
pub fn read_topics(path: &Path) -> Result<TopicsDoc> {
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::decode(path, e))
}
