//! Segments, row-aligned embedding matrices and the per-video corpus.
//!
//! Segment files are JSON lines with `start`, `end` (seconds) and `text`.
//! Embedding files use EMB1: a single-line JSON header followed by
//! `count * dims` little-endian `f32` values in row-major order. A plain CSV
//! (one row per segment) is accepted as a fallback on load.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const EMB1_MAGIC: &str = "EMB1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub video_id: String,
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub text: String,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }
}

#[derive(Debug, Deserialize)]
struct SegmentRecord {
    start: f64,
    end: f64,
    #[serde(default)]
    text: String,
}

/// Segments plus non-fatal findings from loading.
#[derive(Debug, Clone, Default)]
pub struct LoadedSegments {
    pub segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

/// Loads a JSON-lines segment file, sorted by `(start, end)` and re-indexed.
pub fn load_segments(path: &Path, video_id: &str) -> Result<LoadedSegments> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_segments(BufReader::new(file), video_id).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_segments<R: BufRead>(reader: R, video_id: &str) -> Result<LoadedSegments> {
    let mut records: Vec<(usize, SegmentRecord)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<segments>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if !rec.start.is_finite() || !rec.end.is_finite() || rec.start < 0.0 {
            return Err(Error::InvalidSegment {
                index: lineno,
                start: rec.start,
                end: rec.end,
                message: "times must be finite and non-negative".into(),
            });
        }
        if rec.end <= rec.start {
            return Err(Error::InvalidSegment {
                index: lineno,
                start: rec.start,
                end: rec.end,
                message: "end must be greater than start".into(),
            });
        }
        records.push((lineno, rec));
    }
    records.sort_by(|(la, a), (lb, b)| {
        a.start
            .total_cmp(&b.start)
            .then(a.end.total_cmp(&b.end))
            .then(la.cmp(lb))
    });

    let mut warnings = Vec::new();
    for w in records.windows(2) {
        let (la, a) = &w[0];
        let (lb, b) = &w[1];
        if b.start < a.end {
            warnings.push(format!(
                "segments from lines {la} and {lb} overlap ({:.3}..{:.3} vs {:.3}..{:.3})",
                a.start, a.end, b.start, b.end
            ));
        }
    }
    for w in &warnings {
        log::warn!("{video_id}: {w}");
    }

    let segments = records
        .into_iter()
        .enumerate()
        .map(|(index, (_, r))| Segment {
            video_id: video_id.to_string(),
            index,
            t_start: r.start,
            t_end: r.end,
            text: r.text,
        })
        .collect();
    Ok(LoadedSegments { segments, warnings })
}

/// Writes segments back out as JSON lines.
pub fn write_segments<W: Write>(mut out: W, segments: &[Segment]) -> std::io::Result<()> {
    for s in segments {
        let line = serde_json::json!({"start": s.t_start, "end": s.t_end, "text": s.text});
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Audio,
    Visual,
    Fused,
    Word,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Audio => "audio",
            Modality::Visual => "visual",
            Modality::Fused => "fused",
            Modality::Word => "word",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Modality::Text),
            "audio" => Ok(Modality::Audio),
            "visual" => Ok(Modality::Visual),
            "fused" => Ok(Modality::Fused),
            "word" => Ok(Modality::Word),
            other => Err(Error::Format(format!("unknown modality {other:?}"))),
        }
    }
}

/// A per-item failure reported by an encoder, carried in the EMB1 header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub item: usize,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Emb1Header {
    magic: String,
    count: usize,
    dims: usize,
    dtype: String,
    modality: String,
    source: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    errors: Vec<ItemError>,
}

/// Row-major `rows x dims` matrix of `f32` for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub modality: Modality,
    pub rows: usize,
    pub dims: usize,
    pub data: Vec<f32>,
    pub source: String,
    pub errors: Vec<ItemError>,
}

impl EmbeddingMatrix {
    pub fn new(
        modality: Modality,
        rows: usize,
        dims: usize,
        data: Vec<f32>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Format("dims must be at least 1".into()));
        }
        if data.len() != rows * dims {
            return Err(Error::Format(format!(
                "payload has {} values, header implies {}",
                data.len(),
                rows * dims
            )));
        }
        let m = EmbeddingMatrix {
            modality,
            rows,
            dims,
            data,
            source: source.into(),
            errors: Vec::new(),
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_array<F: Scalar>(
        modality: Modality,
        source: impl Into<String>,
        x: &Array2<F>,
    ) -> Result<Self> {
        let (rows, dims) = x.dim();
        let data = x
            .iter()
            .map(|v| v.to_f32().unwrap_or(f32::NAN))
            .collect::<Vec<_>>();
        Self::new(modality, rows, dims, data, source)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn to_array<F: Scalar>(&self) -> Array2<F> {
        Array2::from_shape_fn((self.rows, self.dims), |(i, j)| {
            F::from_f32(self.data[i * self.dims + j]).unwrap_or_else(F::nan)
        })
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / self.dims,
            });
        }
        Ok(())
    }

    /// Serializes to EMB1 bytes.
    pub fn to_emb1(&self) -> Vec<u8> {
        let header = Emb1Header {
            magic: EMB1_MAGIC.into(),
            count: self.rows,
            dims: self.dims,
            dtype: "f32le".into(),
            modality: self.modality.as_str().into(),
            source: self.source.clone(),
            errors: self.errors.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        out.reserve(self.data.len() * 4);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses EMB1 bytes.
    pub fn from_emb1(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("missing header terminator".into()))?;
        let header: Emb1Header = serde_json::from_slice(&bytes[..nl])
            .map_err(|e| Error::Format(format!("bad header: {e}")))?;
        if header.magic != EMB1_MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", header.magic)));
        }
        if header.dtype != "f32le" {
            return Err(Error::Format(format!("unsupported dtype {:?}", header.dtype)));
        }
        let payload = &bytes[nl + 1..];
        let expected = header
            .count
            .checked_mul(header.dims)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("header size overflow".into()))?;
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "payload is {} bytes, header implies {expected}",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let mut m = Self::new(
            header.modality.parse()?,
            header.count,
            header.dims,
            data,
            header.source,
        )?;
        m.errors = header.errors;
        Ok(m)
    }

    /// Parses the CSV fallback: one row per line, comma-separated decimals.
    pub fn from_csv<R: Read>(reader: R, modality: Modality, source: &str) -> Result<Self> {
        let mut data = Vec::new();
        let mut dims = None;
        let mut rows = 0;
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::io("<csv>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f32 = field.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: rows });
                }
                data.push(v);
            }
            let width = data.len() - before;
            match dims {
                None => dims = Some(width),
                Some(d) if d != width => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected {d} columns, found {width}"),
                    })
                }
                _ => {}
            }
            rows += 1;
        }
        let dims = dims.ok_or_else(|| Error::Format("empty CSV".into()))?;
        Self::new(modality, rows, dims, data, source)
    }
}

/// Loads EMB1 (or CSV) and checks the row count when `expected_rows` is set.
///
/// For EMB1 the header modality must equal `modality`; CSV takes it as given.
pub fn load_embeddings(
    path: &Path,
    modality: Modality,
    expected_rows: Option<usize>,
) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let m = if bytes.first() == Some(&b'{') {
        let m = EmbeddingMatrix::from_emb1(&bytes)?;
        if m.modality != modality {
            return Err(Error::Format(format!(
                "{}: header modality {} but {} expected",
                path.display(),
                m.modality,
                modality
            )));
        }
        m
    } else {
        EmbeddingMatrix::from_csv(bytes.as_slice(), modality, &path.display().to_string())?
    };
    if let Some(expected) = expected_rows {
        if m.rows != expected {
            return Err(Error::Alignment {
                expected,
                found: m.rows,
            });
        }
    }
    Ok(m)
}

pub fn write_embeddings(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    fs::write(path, m.to_emb1()).map_err(|e| Error::io(path, e))
}

/// One video's segments and attached modality matrices.
#[derive(Debug, Clone, Default)]
pub struct VideoCorpus {
    pub video_id: String,
    pub segments: Vec<Segment>,
    pub matrices: BTreeMap<Modality, EmbeddingMatrix>,
}

impl VideoCorpus {
    pub fn new(video_id: impl Into<String>, segments: Vec<Segment>) -> Self {
        VideoCorpus {
            video_id: video_id.into(),
            segments,
            matrices: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Attaches `m` under its modality, replacing any previous matrix.
    pub fn attach(&mut self, m: EmbeddingMatrix) -> Result<Option<EmbeddingMatrix>> {
        if m.modality == Modality::Word {
            return Err(Error::Input(
                "word-vector matrices are not segment-aligned".into(),
            ));
        }
        if m.rows != self.segments.len() {
            return Err(Error::Alignment {
                expected: self.segments.len(),
                found: m.rows,
            });
        }
        Ok(self.matrices.insert(m.modality, m))
    }

    pub fn with(mut self, m: EmbeddingMatrix) -> Result<Self> {
        self.attach(m)?;
        Ok(self)
    }

    pub fn get(&self, modality: Modality) -> Option<&EmbeddingMatrix> {
        self.matrices.get(&modality)
    }

    pub fn require(&self, modality: Modality) -> Result<&EmbeddingMatrix> {
        self.get(modality)
            .ok_or_else(|| Error::Config(format!("missing {modality} embeddings")))
    }
}
