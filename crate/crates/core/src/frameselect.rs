//! Representative frame selection and visual pooling per segment.
//!
//! Candidates are sampled uniformly inside the segment, described by a
//! texture-color vector and a Laplacian-variance sharpness, scored by a blend
//! of center preference and sharpness, and picked greedily with a
//! maximal-marginal-relevance penalty plus a near-duplicate cutoff.

use std::path::Path;

use image::{imageops, GrayImage, RgbImage};
use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub const PATCH_SIDE: u32 = 32;
pub const HIST_BINS: usize = 16;
/// Length of the texture-color descriptor.
pub const DESCRIPTOR_LEN: usize = (PATCH_SIDE * PATCH_SIDE) as usize + 3 * HIST_BINS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionParams<F> {
    /// Frames kept per segment.
    pub k: usize,
    /// Candidate pool multiplier over `k`.
    pub alpha: usize,
    /// Minimum candidate count.
    pub min_candidates: usize,
    pub lambda_center: F,
    pub lambda_sharpness: F,
    /// Diversity trade-off in `[0, 1]`; 0 ranks by relevance alone.
    pub diversity: F,
    /// Candidates more similar than this to any selected frame are dropped.
    pub dedup_threshold: F,
    /// Spans shorter than this (seconds) get a single midpoint candidate.
    pub frame_duration: F,
}

impl<F: Scalar> Default for SelectionParams<F> {
    fn default() -> Self {
        SelectionParams {
            k: 5,
            alpha: 4,
            min_candidates: 8,
            lambda_center: F::lit(0.7),
            lambda_sharpness: F::lit(0.3),
            diversity: F::lit(0.3),
            dedup_threshold: F::lit(0.96),
            frame_duration: F::lit(1.0 / 25.0),
        }
    }
}

impl<F: Scalar> SelectionParams<F> {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("frame selection k must be at least 1".into()));
        }
        if (self.lambda_center + self.lambda_sharpness - F::one()).abs() > F::lit(1e-9) {
            return Err(Error::Config(
                "lambda_center + lambda_sharpness must equal 1".into(),
            ));
        }
        if self.diversity < F::zero() || self.diversity > F::one() {
            return Err(Error::Config("diversity must lie in [0, 1]".into()));
        }
        if self.dedup_threshold <= F::zero() || self.dedup_threshold > F::one() {
            return Err(Error::Config("dedup_threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Candidate pool size: `max(k, alpha * k, min_candidates)`.
    pub fn pool_size(&self) -> usize {
        self.k.max(self.alpha * self.k).max(self.min_candidates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePlan<F> {
    pub timestamps: Vec<F>,
    pub warning: Option<String>,
}

/// Uniform interior timestamps `t_start + j/(g+1) * span`, `j = 1..=g`.
pub fn candidate_timestamps<F: Scalar>(
    t_start: F,
    t_end: F,
    params: &SelectionParams<F>,
) -> Result<CandidatePlan<F>> {
    if !(t_end > t_start) {
        return Err(Error::Input(format!(
            "segment span must be positive ({t_start}..{t_end})"
        )));
    }
    let span = t_end - t_start;
    if span < params.frame_duration {
        return Ok(CandidatePlan {
            timestamps: vec![t_start + span * F::lit(0.5)],
            warning: Some(format!(
                "span {span} shorter than one frame; using the midpoint only"
            )),
        });
    }
    let g = params.pool_size();
    let denom = F::from_usize_lossy(g + 1);
    let timestamps = (1..=g)
        .map(|j| t_start + F::from_usize_lossy(j) / denom * span)
        .collect();
    Ok(CandidatePlan {
        timestamps,
        warning: None,
    })
}

/// `1 - min(1, |tau - mid| / (span / 2))`.
pub fn center_preference<F: Scalar>(tau: F, t_start: F, t_end: F) -> F {
    let half = F::lit(0.5) * (t_end - t_start);
    let mid = F::lit(0.5) * (t_start + t_end);
    if half <= F::zero() {
        return F::zero();
    }
    F::one() - ((tau - mid).abs() / half).min(F::one())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDescriptor<F> {
    pub feature: Vec<F>,
    pub sharpness_raw: F,
}

/// Texture-color descriptor and Laplacian-variance sharpness of an RGB frame.
///
/// The descriptor concatenates a 32x32 grayscale patch (values in `[0, 1]`)
/// and a 48-bin RGB histogram (16 bins per channel, whole histogram summing
/// to 1), then L2-normalizes.
pub fn describe_frame<F: Scalar>(image: &RgbImage) -> Result<FrameDescriptor<F>> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::Input("zero-area image".into()));
    }
    let gray = grayscale(image);
    let patch = imageops::resize(&gray, PATCH_SIDE, PATCH_SIDE, imageops::FilterType::Triangle);

    let mut feature = Vec::with_capacity(DESCRIPTOR_LEN);
    feature.extend(patch.pixels().map(|p| F::lit(f64::from(p.0[0]) / 255.0)));

    let mut hist = [0u64; 3 * HIST_BINS];
    for p in image.pixels() {
        for (c, &v) in p.0.iter().enumerate() {
            hist[c * HIST_BINS + usize::from(v) * HIST_BINS / 256] += 1;
        }
    }
    let total = F::from_u64(3 * u64::from(w) * u64::from(h)).unwrap_or_else(F::one);
    feature.extend(hist.iter().map(|&c| F::from_u64(c).unwrap_or_else(F::zero) / total));
    scalar::normalize_in_place(&mut feature);

    Ok(FrameDescriptor {
        feature,
        sharpness_raw: laplacian_variance(&gray),
    })
}

pub fn describe_frame_file<F: Scalar>(path: &Path) -> Result<FrameDescriptor<F>> {
    let img = image::open(path)?.to_rgb8();
    describe_frame(&img)
}

fn grayscale(image: &RgbImage) -> GrayImage {
    GrayImage::from_fn(image.width(), image.height(), |x, y| {
        let [r, g, b] = image.get_pixel(x, y).0;
        let l = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
        image::Luma([l.round().clamp(0.0, 255.0) as u8])
    })
}

/// Variance of the 4-neighbour Laplacian over interior pixels (0..255 scale).
fn laplacian_variance<F: Scalar>(gray: &GrayImage) -> F {
    let (w, h) = gray.dimensions();
    if w < 3 || h < 3 {
        return F::zero();
    }
    let px = |x: u32, y: u32| f64::from(gray.get_pixel(x, y).0[0]);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = px(x - 1, y) + px(x + 1, y) + px(x, y - 1) + px(x, y + 1) - 4.0 * px(x, y);
            sum += v;
            sum_sq += v * v;
            n += 1.0;
        }
    }
    let mean = sum / n;
    F::lit((sum_sq / n - mean * mean).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameCandidate<F> {
    pub timestamp: F,
    pub feature: Vec<F>,
    pub sharpness_raw: F,
    pub sharpness_norm: F,
}

impl<F: Scalar> FrameCandidate<F> {
    pub fn new(timestamp: F, descriptor: FrameDescriptor<F>) -> Self {
        FrameCandidate {
            timestamp,
            feature: descriptor.feature,
            sharpness_raw: descriptor.sharpness_raw,
            sharpness_norm: F::one(),
        }
    }
}

/// Min-max normalizes raw sharpness over one segment's pool; a flat pool gets 1.
pub fn normalize_sharpness<F: Scalar>(candidates: &mut [FrameCandidate<F>]) {
    let (lo, hi) = candidates.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), c| {
        (lo.min(c.sharpness_raw), hi.max(c.sharpness_raw))
    });
    let range = hi - lo;
    for c in candidates.iter_mut() {
        c.sharpness_norm = if range > F::zero() {
            (c.sharpness_raw - lo) / range
        } else {
            F::one()
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selected<F> {
    /// Index into the candidate list.
    pub index: usize,
    /// Rank in selection order, from 0.
    pub rank: usize,
    pub relevance: F,
    /// Diversity-penalized score at the time of the pick.
    pub score: F,
}

pub fn relevance<F: Scalar>(c: &FrameCandidate<F>, t_start: F, t_end: F, p: &SelectionParams<F>) -> F {
    p.lambda_center * center_preference(c.timestamp, t_start, t_end)
        + p.lambda_sharpness * c.sharpness_norm
}

/// Greedy MMR selection of up to `k` candidates.
///
/// The first pick maximizes relevance. Later picks maximize
/// `(1 - nu) * relevance - nu * max_sim_to_selected` among candidates whose
/// similarity to every selected frame is at most the dedup threshold. Ties go
/// to the lower candidate index.
pub fn rank_and_select<F: Scalar>(
    candidates: &[FrameCandidate<F>],
    t_start: F,
    t_end: F,
    params: &SelectionParams<F>,
) -> Vec<Selected<F>> {
    let n = candidates.len();
    let rel: Vec<F> = candidates
        .iter()
        .map(|c| relevance(c, t_start, t_end, params))
        .collect();
    let nu = params.diversity;
    // max similarity to the selected set, per candidate
    let mut max_sim = vec![F::neg_infinity(); n];
    let mut taken = vec![false; n];
    let mut out: Vec<Selected<F>> = Vec::with_capacity(params.k.min(n));

    while out.len() < params.k {
        let mut best: Option<(usize, F)> = None;
        for j in 0..n {
            if taken[j] || max_sim[j] > params.dedup_threshold {
                continue;
            }
            let score = if out.is_empty() {
                rel[j]
            } else {
                (F::one() - nu) * rel[j] - nu * max_sim[j]
            };
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        taken[j] = true;
        out.push(Selected {
            index: j,
            rank: out.len(),
            relevance: rel[j],
            score,
        });
        for (i, c) in candidates.iter().enumerate() {
            if !taken[i] {
                let s = scalar::cosine(&c.feature, &candidates[j].feature);
                if s > max_sim[i] {
                    max_sim[i] = s;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled<F> {
    pub vector: Array1<F>,
    pub warning: Option<String>,
}

/// Mean of the frame embedding rows; an empty set pools to zeros.
pub fn pool_visual<F: Scalar>(frames: ArrayView2<'_, F>) -> Pooled<F> {
    let (k, d) = frames.dim();
    if k == 0 {
        return Pooled {
            vector: Array1::zeros(d),
            warning: Some("segment has no usable frames; visual descriptor is zero".into()),
        };
    }
    let mut acc = Array1::zeros(d);
    for row in frames.rows() {
        acc += &row;
    }
    Pooled {
        vector: acc / F::from_usize_lossy(k),
        warning: None,
    }
}
