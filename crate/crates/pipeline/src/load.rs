//! Per-video input assembly: segments, embeddings from files or endpoints,
//! and frame selection with pooling.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vidtopic_core::corpus::{self, EmbeddingMatrix, Modality, Segment, VideoCorpus};
use vidtopic_core::frameselect::{
    describe_frame_file, normalize_sharpness, pool_visual, rank_and_select, FrameCandidate,
    SelectionParams,
};

use crate::config::{PipelineConfig, SourceSpec, VideoSpec};
use crate::error::{PipelineError, Result};
use crate::fetch::{fetch_embeddings, AudioSpan, Payload};

/// One line of a frame manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub video_id: String,
    pub segment_index: usize,
    pub timestamp: f64,
    pub path: PathBuf,
}

/// A frame kept by selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFrame {
    pub video_id: String,
    pub segment_index: usize,
    pub timestamp: f64,
    pub path: PathBuf,
    pub rank: usize,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct LoadedVideo {
    pub corpus: VideoCorpus,
    /// Selected frames per segment (empty without a frame manifest).
    pub frames: Vec<Vec<SelectedFrame>>,
    pub warnings: Vec<String>,
    /// `input name -> sha256` for every file read.
    pub input_hashes: BTreeMap<String, String>,
}

struct Reader<'a> {
    config: &'a PipelineConfig,
    hashes: BTreeMap<String, String>,
}

impl Reader<'_> {
    fn read(&mut self, p: &Path) -> Result<(PathBuf, Vec<u8>)> {
        let path = self.config.resolve(p);
        let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
        self.hashes
            .insert(p.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok((path, bytes))
    }
}

pub fn read_frame_manifest(reader: impl BufRead, video_id: &str) -> Result<Vec<FrameEntry>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::decode("frame manifest", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let e: FrameEntry = serde_json::from_str(&line)
            .map_err(|e| PipelineError::decode("frame manifest", format!("line {}: {e}", i + 1)))?;
        if e.video_id == video_id {
            out.push(e);
        }
    }
    Ok(out)
}

/// Loads the modalities the run needs for `spec`, and nothing else.
pub fn load_video(config: &PipelineConfig, spec: &VideoSpec) -> Result<LoadedVideo> {
    let mut r = Reader {
        config,
        hashes: BTreeMap::new(),
    };
    let (_, seg_bytes) = r.read(&spec.segments)?;
    let loaded = corpus::parse_segments(BufReader::new(seg_bytes.as_slice()), &spec.id)?;
    let mut warnings = loaded.warnings;
    let mut video = VideoCorpus::new(spec.id.clone(), loaded.segments);
    let mut frames = vec![Vec::new(); video.len()];

    for m in config.needed_modalities() {
        let src = spec
            .source(m)
            .ok_or_else(|| PipelineError::Config(format!("{m} embeddings are required")))?;
        let matrix = if let (Modality::Visual, Some(manifest)) = (m, &src.frames) {
            let (mat, sel, w) = pooled_visual(&mut r, spec, src, manifest, &video.segments)?;
            frames = sel;
            warnings.extend(w);
            mat
        } else {
            load_modality(&mut r, m, src, &video.segments)?
        };
        if !matrix.errors.is_empty() {
            warnings.push(format!(
                "{m}: encoder reported {} item error(s)",
                matrix.errors.len()
            ));
        }
        video.attach(matrix)?;
    }
    Ok(LoadedVideo {
        corpus: video,
        frames,
        warnings,
        input_hashes: r.hashes,
    })
}

fn load_modality(
    r: &mut Reader<'_>,
    m: Modality,
    src: &SourceSpec,
    segments: &[Segment],
) -> Result<EmbeddingMatrix> {
    if let Some(file) = &src.file {
        let (path, bytes) = r.read(file)?;
        let mut matrix = parse_matrix(&path, &bytes, m)?;
        if matrix.rows != segments.len() {
            return Err(vidtopic_core::Error::Alignment {
                expected: segments.len(),
                found: matrix.rows,
            }
            .into());
        }
        matrix.modality = m;
        return Ok(matrix);
    }
    let url = src.endpoint.as_deref().expect("validated source");
    let payload = match m {
        Modality::Audio => Payload::AudioSpans(
            segments
                .iter()
                .map(|s| AudioSpan {
                    file: src.media.as_ref().map(|p| r.config.resolve(p)),
                    start: s.t_start,
                    end: s.t_end,
                })
                .collect(),
        ),
        _ => Payload::Texts(segments.iter().map(|s| s.text.clone()).collect()),
    };
    fetch_embeddings(url, m, &payload, &r.config.http)
}

fn parse_matrix(path: &Path, bytes: &[u8], m: Modality) -> Result<EmbeddingMatrix> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let source = path.display().to_string();
    let matrix = if is_csv {
        EmbeddingMatrix::from_csv(bytes, m, &source)?
    } else {
        EmbeddingMatrix::from_emb1(bytes)?
    };
    Ok(matrix)
}

type Pooled = (EmbeddingMatrix, Vec<Vec<SelectedFrame>>, Vec<String>);

fn pooled_visual(
    r: &mut Reader<'_>,
    spec: &VideoSpec,
    src: &SourceSpec,
    manifest: &Path,
    segments: &[Segment],
) -> Result<Pooled> {
    let (manifest_path, bytes) = r.read(manifest)?;
    let entries = read_frame_manifest(BufReader::new(bytes.as_slice()), &spec.id)?;
    let frame_dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let params: &SelectionParams<f64> = &r.config.frame_selection;
    let mut warnings = Vec::new();

    let mut by_segment: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        if e.segment_index >= segments.len() {
            return Err(PipelineError::decode(
                &manifest_path,
                format!("frame {} refers to missing segment {}", i, e.segment_index),
            ));
        }
        by_segment.entry(e.segment_index).or_default().push(i);
    }

    // selected manifest entries per segment, in rank order
    let mut chosen: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); segments.len()];
    for (seg, idx) in &by_segment {
        let s = &segments[*seg];
        let mut cands = Vec::with_capacity(idx.len());
        for &i in idx {
            let path = frame_dir.join(&entries[i].path);
            cands.push(FrameCandidate::new(entries[i].timestamp, describe_frame_file(&path)?));
        }
        normalize_sharpness(&mut cands);
        for sel in rank_and_select(&cands, s.t_start, s.t_end, params) {
            chosen[*seg].push((idx[sel.index], sel.rank, sel.score));
        }
    }

    let frame_rows: Array2<f64> = match (&src.file, &src.endpoint) {
        (Some(file), _) => {
            let (path, bytes) = r.read(file)?;
            let m = parse_matrix(&path, &bytes, Modality::Visual)?;
            if m.rows != entries.len() {
                return Err(vidtopic_core::Error::Alignment {
                    expected: entries.len(),
                    found: m.rows,
                }
                .into());
            }
            m.to_array()
        }
        (None, Some(url)) => {
            // only the selected frames are sent; rows come back in that order
            let order: Vec<usize> = chosen.iter().flatten().map(|c| c.0).collect();
            let payload = Payload::Images(order.iter().map(|&i| frame_dir.join(&entries[i].path)).collect());
            let m = fetch_embeddings(url, Modality::Visual, &payload, &r.config.http)?.to_array::<f64>();
            let mut full = Array2::zeros((entries.len(), m.ncols()));
            for (row, &i) in order.iter().enumerate() {
                full.row_mut(i).assign(&m.row(row));
            }
            full
        }
        (None, None) => unreachable!("validated source"),
    };

    let d = frame_rows.ncols();
    let mut pooled = Array2::<f64>::zeros((segments.len(), d));
    let mut selected = vec![Vec::new(); segments.len()];
    for (seg, picks) in chosen.iter().enumerate() {
        let rows: Vec<usize> = picks.iter().map(|p| p.0).collect();
        let p = pool_visual(frame_rows.select(ndarray::Axis(0), &rows).view());
        if let Some(w) = p.warning {
            warnings.push(format!("segment {seg}: {w}"));
        }
        pooled.row_mut(seg).assign(&p.vector);
        selected[seg] = picks
            .iter()
            .map(|&(i, rank, score)| SelectedFrame {
                video_id: spec.id.clone(),
                segment_index: seg,
                timestamp: entries[i].timestamp,
                path: entries[i].path.clone(),
                rank,
                score,
            })
            .collect();
    }
    let source = format!("pooled:{}", manifest.display());
    Ok((EmbeddingMatrix::from_array(Modality::Visual, &source, &pooled)?, selected, warnings))
}
