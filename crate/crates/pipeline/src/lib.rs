//! Batch runner for multimodal topic discovery over segmented video.
//!
//! A run reads a YAML [`PipelineConfig`], loads each video's segments and
//! embeddings (files or encoder endpoints), discovers topics per video on a
//! bounded worker pool and writes topic, timeline, metrics and manifest
//! documents. [`synth`] builds seeded corpora with planted topics.

pub mod analyze;
pub mod config;
pub mod error;
pub mod fetch;
pub mod load;
pub mod run;
pub mod synth;

pub use analyze::{analyze_video, Settings, TopicsDoc, VideoAnalysis};
pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use fetch::{fetch_embeddings, Payload};
pub use run::{run, write_outputs, MetricsReport, RunManifest, RunOutput};
pub use synth::{make_synthetic_corpus, write_synthetic_corpus, Informativeness, SynthParams};
