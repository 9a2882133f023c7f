use ndarray::Array2;
use proptest::prelude::*;
use vidtopic_core::corpus::{EmbeddingMatrix, Modality, Segment, VideoCorpus};
use vidtopic_core::fusion::{
    concat_matrices, fuse_corpus, fuse_raw, gate, normalize_truncate, FusionWeights, FUSED_BLOCKS,
};
use vidtopic_core::scalar;

fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, d)
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..12, 1usize..12, 1usize..12)
        .prop_flat_map(|(a, b, c)| (vec_strategy(a), vec_strategy(b), vec_strategy(c)))
}

fn w() -> FusionWeights<f64> {
    FusionWeights::default()
}

/// Weighted-block and interaction-block norms for a fused vector.
fn block_norms(m: &[f64], d: usize) -> (f64, f64) {
    let weighted = scalar::norm(&m[..3 * d]);
    let inter = scalar::norm(&m[3 * d..]);
    (weighted, inter)
}

proptest! {
    #[test]
    fn gate_is_bounded_and_output_unit((t, a, v) in triple()) {
        let f = fuse_raw(&t, &a, &v, &w()).unwrap();
        let d_min = t.len().min(a.len()).min(v.len());
        prop_assert_eq!(f.vector.len(), FUSED_BLOCKS * d_min);
        prop_assert!((0.0..=1.0).contains(&f.gate));
        if !f.degenerate {
            prop_assert!((scalar::norm(&f.vector) - 1.0).abs() < 1e-9);
        }
        prop_assert!(f.vector.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn fusion_ignores_positive_rescaling((t, a, v) in triple(), k in 0.01f64..100.0) {
        let base = fuse_raw(&t, &a, &v, &w()).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| x * k).collect();
        let other = fuse_raw(&t, &scaled, &v, &w()).unwrap();
        for (x, y) in base.vector.iter().zip(&other.vector) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_then_normalization((x, d) in (1usize..10).prop_flat_map(|d| (vec_strategy(d + 3), Just(d)))) {
        let y = normalize_truncate(&x, d).unwrap();
        prop_assert_eq!(y.len(), d);
        let n = scalar::norm(&x[..d]);
        if n > 0.0 {
            for i in 0..d {
                prop_assert!((y[i] - x[i] / n).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn gate_monotone_along_ordered_triples() {
    // rotate a and v away from t in a plane; every pairwise similarity
    // moves one way so the gate must follow
    let angle_vec = |th: f64| vec![th.cos(), th.sin(), 0.0];
    let mut prev = f64::INFINITY;
    for step in 0..100 {
        let th = step as f64 * std::f64::consts::PI / 200.0;
        let t = angle_vec(0.0);
        let a = angle_vec(th);
        let v = angle_vec(-th);
        let (_, s) = gate(&t, &a, &v).unwrap();
        assert!(s < prev || step == 0);
        prev = s;
    }
}

#[test]
fn hand_checked_gate_values() {
    let e = [1.0f64, 0.0, 0.0];
    let (_, s) = gate(&e, &e, &e).unwrap();
    assert!((s - 1.0).abs() <= 1e-12);
    let (sims, s) = gate(&[1.0f64, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
    assert_eq!((sims.ta, sims.tv, sims.av), (0.0, 0.0, 0.0));
    assert!((s - 0.5).abs() <= 1e-12);
    let neg = [-1.0, 0.0, 0.0];
    let (sims, s) = gate(&e, &neg, &e).unwrap();
    assert_eq!((sims.ta, sims.tv, sims.av), (-1.0, 1.0, -1.0));
    assert!((s - 1.0 / 3.0).abs() <= 1e-12);
}

#[test]
fn basis_vector_layout() {
    let e1 = [1.0, 0.0, 0.0, 0.0];
    let f = fuse_raw(&e1, &e1, &e1, &w()).unwrap();
    let pre = [0.34, 0.33, 0.33, 1.0, 1.0, 1.0, 1.0];
    let norm = pre.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
    for (i, x) in f.vector.iter().enumerate() {
        if i % 4 == 0 {
            assert!((x - pre[i / 4] / norm).abs() < 1e-12, "position {i}");
        } else {
            assert_eq!(*x, 0.0);
        }
    }
}

#[test]
fn consistent_inputs_weigh_the_modality_blocks_more() {
    let t = [0.5, 0.5, 0.5, 0.5];
    let consistent = fuse_raw(&t, &t, &t, &w()).unwrap();
    let mixed = fuse_raw(&t, &[0.5, -0.5, 0.5, -0.5], &[0.5, 0.5, -0.5, -0.5], &w()).unwrap();
    assert!(consistent.gate > mixed.gate);
    let (wc, ic) = block_norms(&consistent.vector, 4);
    let (wm, im) = block_norms(&mixed.vector, 4);
    assert!(wm / im < wc / ic);
    assert!(wm < wc);
}

#[test]
fn zero_modality_degrades_gracefully() {
    let f = fuse_raw(&[1.0, 2.0], &[0.0, 0.0], &[2.0, 1.0], &w()).unwrap();
    assert!(f.vector.iter().all(|x| x.is_finite()));
    assert_eq!(f.sims.ta, 0.0);
    assert_eq!(f.sims.av, 0.0);
    let all_zero = fuse_raw(&[0.0], &[0.0], &[0.0], &w()).unwrap();
    assert!(all_zero.degenerate);
    assert!(all_zero.vector.iter().all(|&x| x == 0.0));
}

fn corpus(t: &Array2<f64>, a: &Array2<f64>, v: &Array2<f64>) -> VideoCorpus {
    let n = t.nrows();
    let segments = (0..n)
        .map(|i| Segment {
            video_id: "v".into(),
            index: i,
            t_start: i as f64,
            t_end: i as f64 + 1.0,
            text: String::new(),
        })
        .collect();
    VideoCorpus::new("v", segments)
        .with(EmbeddingMatrix::from_array(Modality::Text, "t", t).unwrap())
        .unwrap()
        .with(EmbeddingMatrix::from_array(Modality::Audio, "a", a).unwrap())
        .unwrap()
        .with(EmbeddingMatrix::from_array(Modality::Visual, "v", v).unwrap())
        .unwrap()
}

#[test]
fn corpus_dimension_contract_and_row_independence() {
    let t = Array2::from_shape_fn((3, 6), |(i, j)| ((i * 7 + j * 3) % 5) as f64 - 1.5);
    let a = Array2::from_shape_fn((3, 5), |(i, j)| ((i * 2 + j) % 4) as f64 + 0.5);
    let v = Array2::from_shape_fn((3, 4), |(i, j)| ((i + j * 5) % 3) as f64 - 0.7);
    let fused = fuse_corpus(&corpus(&t, &a, &v), &w()).unwrap();
    assert_eq!((fused.matrix.rows, fused.matrix.dims), (3, 28));
    assert_eq!(fused.matrix.modality, Modality::Fused);

    let order = [2, 0, 1];
    let p = |m: &Array2<f64>| m.select(ndarray::Axis(0), &order);
    let permuted = fuse_corpus(&corpus(&p(&t), &p(&a), &p(&v)), &w()).unwrap();
    for (new, &old) in order.iter().enumerate() {
        assert_eq!(permuted.matrix.row(new), fused.matrix.row(old));
    }
}

#[test]
fn aligned_audio_raises_every_gate() {
    let t = Array2::from_shape_fn((6, 4), |(i, j)| ((i + 1) * (j + 2) % 7) as f64 + 0.1);
    let v = Array2::from_shape_fn((6, 4), |(i, j)| ((i * 3 + j) % 5) as f64 + 0.2);
    let noise = Array2::from_shape_fn((6, 4), |(i, j)| if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
    let same = fuse_corpus(&corpus(&t, &t, &v), &w()).unwrap();
    let other = fuse_corpus(&corpus(&t, &noise, &v), &w()).unwrap();
    for (x, y) in same.gates.iter().zip(&other.gates) {
        assert!(x.s > y.s);
    }
}

#[test]
fn missing_modality_is_named() {
    let t = Array2::from_elem((2, 2), 1.0);
    let c = VideoCorpus::new("v", vec![
        Segment { video_id: "v".into(), index: 0, t_start: 0.0, t_end: 1.0, text: String::new() },
        Segment { video_id: "v".into(), index: 1, t_start: 1.0, t_end: 2.0, text: String::new() },
    ])
    .with(EmbeddingMatrix::from_array(Modality::Text, "t", &t).unwrap())
    .unwrap();
    let err = fuse_corpus(&c, &w()).unwrap_err().to_string();
    assert!(err.contains("audio"), "{err}");
}

#[test]
fn bimodal_concat_is_two_d_min_and_unit() {
    let x = Array2::from_shape_fn((4, 6), |(i, j)| (i + j) as f64 + 1.0);
    let y = Array2::from_shape_fn((4, 3), |(i, j)| (i * j) as f64 - 1.0);
    let c = concat_matrices(x.view(), y.view()).unwrap();
    assert_eq!(c.ncols(), 6);
    for row in c.rows() {
        assert!((scalar::norm(&row.to_vec()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fusion_is_bit_deterministic() {
    let t = [0.3, -0.1, 0.7];
    let a = [0.2, 0.9, -0.4];
    let v = [-0.5, 0.5, 0.1];
    let x = fuse_raw(&t, &a, &v, &w()).unwrap();
    let y = fuse_raw(&t, &a, &v, &w()).unwrap();
    let bits = |f: &[f64]| f.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&x.vector), bits(&y.vector));
}

#[test]
fn works_in_single_precision() {
    let f = fuse_raw(&[1.0f32, 2.0, 3.0], &[3.0, 2.0, 1.0], &[1.0, 0.0, 1.0], &FusionWeights::default()).unwrap();
    assert!((scalar::norm(&f.vector) - 1.0).abs() < 1e-6);
}
