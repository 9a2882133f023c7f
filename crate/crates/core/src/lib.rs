//! Multimodal topic discovery over ASR-segmented video.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] loads segments and row-aligned embedding matrices (EMB1 / CSV).
//! * [`frameselect`] picks representative frames per segment and pools them.
//! * [`fusion`] builds the similarity-gated tri-modal embedding.
//! * [`cluster`] reduces, density-clusters, labels and merges topics.
//! * [`refine`] writes extractive per-topic summaries.
//! * [`diagnostics`] derives speaker-style labels from audio embeddings.
//! * [`metrics`] scores a labelling (structure, cluster validity, semantics).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to [`Real`], which is what the pipeline uses.

pub mod cluster;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod frameselect;
pub mod fusion;
pub mod linalg;
pub mod metrics;
pub mod refine;
pub mod scalar;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar used by the pipeline for all derived quantities.
pub type Real = f64;

pub type Matrix = ndarray::Array2<Real>;
pub type FusedEmbedding = fusion::FusedEmbedding<Real>;
pub type FusionWeights = fusion::FusionWeights<Real>;
pub type GateSims = fusion::GateSims<Real>;
pub type SelectionParams = frameselect::SelectionParams<Real>;
pub type FrameCandidate = frameselect::FrameCandidate<Real>;
pub type ClusterParams = cluster::ClusterParams<Real>;
pub type SeedTopic = cluster::SeedTopic<Real>;
pub type PcaReducer = cluster::reduce::PcaReducer;
pub type ClusterValidity = metrics::ClusterValidity<Real>;
pub type StructureMetrics = metrics::StructureMetrics<Real>;
pub type WordVectorTable = metrics::WordVectorTable<Real>;
