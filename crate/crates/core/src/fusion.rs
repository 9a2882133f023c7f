//! Similarity-gated tri-modal fusion.
//!
//! Each modality vector is truncated to the shared minimum dimension and
//! L2-normalized. The three pairwise dot products give a gate
//! `s = (sim_ta + sim_tv + sim_av + 3) / 6` that scales the weighted modality
//! blocks; the pairwise and triple Hadamard products are appended unscaled and
//! the concatenation is L2-normalized, giving a `7 * d_min` vector.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingMatrix, Modality, VideoCorpus};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Number of blocks in the fused vector.
pub const FUSED_BLOCKS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionWeights<F> {
    pub text: F,
    pub audio: F,
    pub visual: F,
}

impl<F: Scalar> Default for FusionWeights<F> {
    fn default() -> Self {
        FusionWeights {
            text: F::lit(0.34),
            audio: F::lit(0.33),
            visual: F::lit(0.33),
        }
    }
}

impl<F: Scalar> FusionWeights<F> {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("text", self.text), ("audio", self.audio), ("visual", self.visual)] {
            if !(w > F::zero() && w <= F::one()) {
                return Err(Error::Config(format!(
                    "fusion weight for {name} must lie in (0, 1], got {w}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSims<F> {
    pub ta: F,
    pub tv: F,
    pub av: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedEmbedding<F> {
    pub vector: Vec<F>,
    pub d_min: usize,
    pub gate: F,
    pub sims: GateSims<F>,
    /// The pre-normalization concatenation was all zeros.
    pub degenerate: bool,
}

/// First `d_min` coordinates of `x`, L2-normalized. Zero stays zero.
pub fn normalize_truncate<F: Scalar>(x: &[F], d_min: usize) -> Result<Vec<F>> {
    if d_min == 0 || x.len() < d_min {
        return Err(Error::Dimension(format!(
            "cannot truncate a {}-vector to {d_min}",
            x.len()
        )));
    }
    let mut out = x[..d_min].to_vec();
    scalar::normalize_in_place(&mut out);
    Ok(out)
}

fn check_same_len<F>(parts: &[&[F]]) -> Result<usize> {
    let d = parts[0].len();
    if parts.iter().any(|p| p.len() != d) {
        return Err(Error::Dimension(format!(
            "modality lengths differ: {:?}",
            parts.iter().map(|p| p.len()).collect::<Vec<_>>()
        )));
    }
    Ok(d)
}

/// Pairwise similarities and the gate value.
pub fn gate<F: Scalar>(t: &[F], a: &[F], v: &[F]) -> Result<(GateSims<F>, F)> {
    check_same_len(&[t, a, v])?;
    let sims = GateSims {
        ta: scalar::dot(t, a),
        tv: scalar::dot(t, v),
        av: scalar::dot(a, v),
    };
    let s = (sims.ta + sims.tv + sims.av + F::lit(3.0)) / F::lit(6.0);
    Ok((sims, s))
}

/// Builds the fused vector from prepared (unit-or-zero) modality vectors.
pub fn fuse<F: Scalar>(
    t: &[F],
    a: &[F],
    v: &[F],
    weights: &FusionWeights<F>,
    sims: GateSims<F>,
    s: F,
) -> Result<FusedEmbedding<F>> {
    let d = check_same_len(&[t, a, v])?;
    let mut out = Vec::with_capacity(FUSED_BLOCKS * d);
    out.extend(t.iter().map(|&x| weights.text * s * x));
    out.extend(a.iter().map(|&x| weights.audio * s * x));
    out.extend(v.iter().map(|&x| weights.visual * s * x));
    out.extend(t.iter().zip(a).map(|(&x, &y)| x * y));
    out.extend(t.iter().zip(v).map(|(&x, &y)| x * y));
    out.extend(a.iter().zip(v).map(|(&x, &y)| x * y));
    out.extend(t.iter().zip(a).zip(v).map(|((&x, &y), &z)| x * y * z));
    let n = scalar::norm(&out);
    let degenerate = n == F::zero();
    if degenerate {
        out.iter_mut().for_each(|x| *x = F::zero());
    } else {
        out.iter_mut().for_each(|x| *x /= n);
    }
    Ok(FusedEmbedding {
        vector: out,
        d_min: d,
        gate: s,
        sims,
        degenerate,
    })
}

/// Normalize, gate and fuse raw modality vectors of possibly different length.
pub fn fuse_raw<F: Scalar>(
    t: &[F],
    a: &[F],
    v: &[F],
    weights: &FusionWeights<F>,
) -> Result<FusedEmbedding<F>> {
    let d_min = t.len().min(a.len()).min(v.len());
    let t = normalize_truncate(t, d_min)?;
    let a = normalize_truncate(a, d_min)?;
    let v = normalize_truncate(v, d_min)?;
    let (sims, s) = gate(&t, &a, &v)?;
    fuse(&t, &a, &v, weights, sims, s)
}

/// Per-segment gate diagnostics written next to the fused matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateRecord<F> {
    pub segment: usize,
    pub s: F,
    pub sim_ta: F,
    pub sim_tv: F,
    pub sim_av: F,
    pub degenerate: bool,
}

/// Row-wise fusion of three matrices.
pub fn fuse_matrices<F: Scalar>(
    t: ArrayView2<'_, F>,
    a: ArrayView2<'_, F>,
    v: ArrayView2<'_, F>,
    weights: &FusionWeights<F>,
) -> Result<(Array2<F>, Vec<GateRecord<F>>)> {
    weights.validate()?;
    let n = t.nrows();
    if a.nrows() != n || v.nrows() != n {
        return Err(Error::Alignment {
            expected: n,
            found: if a.nrows() != n { a.nrows() } else { v.nrows() },
        });
    }
    let d_min = t.ncols().min(a.ncols()).min(v.ncols());
    let mut out = Array2::zeros((n, FUSED_BLOCKS * d_min));
    let mut gates = Vec::with_capacity(n);
    for i in 0..n {
        let fused = fuse_raw(
            &t.row(i).to_vec(),
            &a.row(i).to_vec(),
            &v.row(i).to_vec(),
            weights,
        )?;
        out.row_mut(i)
            .iter_mut()
            .zip(&fused.vector)
            .for_each(|(o, &x)| *o = x);
        gates.push(GateRecord {
            segment: i,
            s: fused.gate,
            sim_ta: fused.sims.ta,
            sim_tv: fused.sims.tv,
            sim_av: fused.sims.av,
            degenerate: fused.degenerate,
        });
    }
    Ok((out, gates))
}

/// Bi-modal baseline: normalize, truncate to the pair's shared dimension,
/// concatenate and renormalize. No gate, no interaction terms.
pub fn concat_matrices<F: Scalar>(x: ArrayView2<'_, F>, y: ArrayView2<'_, F>) -> Result<Array2<F>> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::Alignment {
            expected: n,
            found: y.nrows(),
        });
    }
    let d_min = x.ncols().min(y.ncols());
    let mut out = Array2::zeros((n, 2 * d_min));
    for i in 0..n {
        let mut row = normalize_truncate(&x.row(i).to_vec(), d_min)?;
        row.extend(normalize_truncate(&y.row(i).to_vec(), d_min)?);
        scalar::normalize_in_place(&mut row);
        out.row_mut(i).iter_mut().zip(&row).for_each(|(o, &v)| *o = v);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FusedCorpus {
    pub matrix: EmbeddingMatrix,
    pub gates: Vec<GateRecord<f64>>,
}

/// Fuses the text, audio and visual matrices attached to `corpus`.
pub fn fuse_corpus(corpus: &VideoCorpus, weights: &FusionWeights<f64>) -> Result<FusedCorpus> {
    let mut mats = Vec::with_capacity(3);
    for m in [Modality::Text, Modality::Audio, Modality::Visual] {
        let em = corpus
            .get(m)
            .ok_or_else(|| Error::Config(format!("fusion needs {m} embeddings")))?;
        mats.push(em.to_array::<f64>());
    }
    let (fused, gates) = fuse_matrices(mats[0].view(), mats[1].view(), mats[2].view(), weights)?;
    let matrix = EmbeddingMatrix::from_array(Modality::Fused, "similarity-gated-fusion", &fused)?;
    Ok(FusedCorpus { matrix, gates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        assert_eq!(
            normalize_truncate(&[3.0f64, 4.0, 0.0, 0.0], 2).unwrap(),
            vec![0.6, 0.8]
        );
    }

    #[test]
    fn truncate_is_idempotent_on_unit_vectors() {
        let x = vec![0.6f64, 0.8];
        assert_eq!(normalize_truncate(&x, 2).unwrap(), x);
    }

    #[test]
    fn zero_vector_stays_zero() {
        assert_eq!(normalize_truncate(&[0.0f32; 4], 3).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn too_short_is_dimension_error() {
        assert!(matches!(
            normalize_truncate(&[1.0f64], 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn gate_reference_points() {
        let e1 = [1.0f64, 0.0, 0.0];
        let e2 = [0.0f64, 1.0, 0.0];
        let e3 = [0.0f64, 0.0, 1.0];
        assert_eq!(gate(&e1, &e1, &e1).unwrap().1, 1.0);
        assert_eq!(gate(&e1, &e2, &e3).unwrap().1, 0.5);
        let neg = [-1.0f64, 0.0, 0.0];
        let (sims, s) = gate(&e1, &neg, &e1).unwrap();
        assert_eq!((sims.ta, sims.tv, sims.av), (-1.0, 1.0, -1.0));
        assert!((s - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fused_layout_for_aligned_basis_vector() {
        let e1 = [1.0f64, 0.0, 0.0, 0.0];
        let w = FusionWeights::default();
        let f = fuse_raw(&e1, &e1, &e1, &w).unwrap();
        assert_eq!(f.vector.len(), 28);
        let pre = [0.34, 0.33, 0.33, 1.0, 1.0, 1.0, 1.0];
        let n = pre.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        for (pos, v) in f.vector.iter().enumerate() {
            if pos % 4 == 0 {
                assert!((v - pre[pos / 4] / n).abs() < 1e-12, "pos {pos}");
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn all_zero_inputs_are_degenerate_not_nan() {
        let z = [0.0f64; 3];
        let f = fuse_raw(&z, &z, &z, &FusionWeights::default()).unwrap();
        assert!(f.degenerate);
        assert!(f.vector.iter().all(|&x| x == 0.0));
        assert_eq!(f.gate, 0.5);
    }

    #[test]
    fn bad_weights_are_rejected() {
        let w = FusionWeights {
            text: 0.0,
            audio: 0.5,
            visual: 0.5,
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn bimodal_concat_has_twice_pair_dim() {
        let x = ndarray::array![[3.0f64, 4.0, 1.0], [1.0, 0.0, 0.0]];
        let y = ndarray::array![[0.0f64, 2.0], [0.0, 0.0]];
        let c = concat_matrices(x.view(), y.view()).unwrap();
        assert_eq!(c.dim(), (2, 4));
        let r0: Vec<f64> = c.row(0).to_vec();
        assert!((scalar::norm(&r0) - 1.0).abs() < 1e-12);
        assert_eq!(c.row(1).to_vec(), vec![1.0, 0.0, 0.0, 0.0]);
    }
}
