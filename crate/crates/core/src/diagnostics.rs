//! Speaker-style labels from audio embeddings. Metadata only: nothing in the
//! topic path reads these labels.

use serde::{Deserialize, Serialize};

use crate::cluster::{density_cluster, ClusterParams, PcaReducer, Reducer};
use crate::corpus::{EmbeddingMatrix, Modality};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerLabel {
    pub segment_index: usize,
    /// `-1` is noise.
    pub label: i64,
}

pub fn speaker_style_labels(
    audio: &EmbeddingMatrix,
    params: &ClusterParams<f64>,
) -> Result<Vec<SpeakerLabel>> {
    if audio.modality != Modality::Audio {
        return Err(Error::Input(format!(
            "speaker-style labels need audio embeddings, got {}",
            audio.modality
        )));
    }
    params.validate()?;
    let x = audio.to_array::<f64>();
    let reduced = PcaReducer {
        components: params.reducer_components,
    }
    .reduce(x.view())?;
    let labels = density_cluster(reduced.embedding.view(), params.min_cluster_size);
    Ok(labels
        .into_iter()
        .enumerate()
        .map(|(segment_index, label)| SpeakerLabel {
            segment_index,
            label,
        })
        .collect())
}
