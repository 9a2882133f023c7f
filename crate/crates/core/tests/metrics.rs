mod support;

use std::collections::HashMap;

use ndarray::Array2;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vidtopic_core::metrics::{
    aggregate, cluster_validity, iec, npmi, structure_metrics, topic_diversity, we_alignment,
    TransitionOptions, WordVectorTable,
};

const TOL: f64 = 1e-9;

struct Instance {
    x: Array2<f64>,
    rows: Vec<Vec<f64>>,
    labels: Vec<i64>,
    videos: Vec<usize>,
}

fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(2..=30);
    let t = rng.gen_range(1..=5);
    let d = rng.gen_range(1..=6);
    let labels: Vec<i64> = (0..n)
        .map(|_| if rng.gen_bool(0.15) { -1 } else { rng.gen_range(0..t) })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let mut videos = Vec::new();
    let mut left = n;
    while left > 0 {
        let len = rng.gen_range(1..=left);
        videos.push(len);
        left -= len;
    }
    Instance {
        x: Array2::from_shape_vec((n, d), rows.concat()).unwrap(),
        rows,
        labels,
        videos,
    }
}

fn opt_close(got: Option<f64>, want: Option<f64>) -> bool {
    opt_close_tol(got, want, TOL)
}

fn opt_close_tol(got: Option<f64>, want: Option<f64>, tol: f64) -> bool {
    match (got, want) {
        (Some(a), Some(b)) => support::close(a, b, tol),
        (None, None) => true,
        _ => false,
    }
}

#[test]
fn structure_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..500 {
        let inst = instance(&mut rng);
        for exclude in [false, true] {
            let got = structure_metrics::<f64>(&inst.labels, &inst.videos, TransitionOptions { exclude_outliers: exclude });
            let want = support::structure_reference(&inst.labels, &inst.videos, exclude);
            assert!(support::close(got.noise_ratio, want.noise, TOL));
            assert!(support::close(got.transition_rate, want.transition, TOL));
            assert!(support::close(got.entropy_norm, want.entropy, TOL));
            assert!(support::close(got.gini, want.gini, TOL), "{} vs {}", got.gini, want.gini);
            assert_eq!(got.n_topics, want.topics);
        }
    }
}

#[test]
fn validity_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut defined = 0;
    for _ in 0..500 {
        let inst = instance(&mut rng);
        let got = cluster_validity(inst.x.view(), &inst.labels, "fused");
        let sil = support::silhouette_reference(&inst.rows, &inst.labels);
        match got {
            None => assert!(sil.is_none()),
            Some(v) => {
                defined += 1;
                assert!(support::close(v.silhouette, sil.unwrap(), TOL));
                assert!(opt_close(v.ch, support::ch_reference(&inst.rows, &inst.labels)), "{:?}", v.ch);
                assert!(opt_close(v.db, support::db_reference(&inst.rows, &inst.labels)));
                assert!((-1.0..=1.0).contains(&v.silhouette));
            }
        }
        assert!(opt_close(iec(inst.x.view(), &inst.labels), support::iec_reference(&inst.rows, &inst.labels)));
    }
    assert!(defined > 300);
}

const VOCAB: [&str; 8] = ["war", "army", "vote", "goal", "rain", "tax", "film", "moon"];

#[test]
fn semantic_metrics_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    for _ in 0..500 {
        let n_docs = rng.gen_range(1..=30);
        let docs: Vec<String> = (0..n_docs)
            .map(|_| {
                let len = rng.gen_range(0..6);
                (0..len).map(|_| *VOCAB.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let doc_refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let t = rng.gen_range(1..=5);
        let k = rng.gen_range(2..=4);
        let mut pool: Vec<&str> = VOCAB.to_vec();
        pool.push("absent");
        let topics: Vec<Vec<String>> = (0..t)
            .map(|_| pool.choose_multiple(&mut rng, k).map(|w| w.to_string()).collect())
            .collect();

        let got = npmi(&topics, &doc_refs, 1e-12f64);
        assert!(opt_close(got.value, support::npmi_reference(&topics, &doc_refs, 1e-12)));
        if let Some(v) = got.value {
            assert!((-1.0 - TOL..=1.0 + TOL).contains(&v));
        }
        let div = topic_diversity::<f64>(&topics, k).unwrap();
        assert!(support::close(div, support::diversity_reference(&topics, k), TOL));

        let vectors: HashMap<String, Vec<f64>> = VOCAB
            .iter()
            .map(|w| (w.to_string(), (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let table = WordVectorTable::from_entries(vectors.clone().into_iter().collect()).unwrap();
        assert!(opt_close(we_alignment(&topics, &table).value, support::we_reference(&topics, &vectors)));
    }
}

#[test]
fn structure_fixture() {
    let m = structure_metrics::<f64>(&[-1, -1, 0, 0, 0, 1, 1, 1, 1, 1], &[10], TransitionOptions::default());
    assert!((m.noise_ratio - 0.2).abs() < 1e-12);
    assert!((m.gini - 0.125).abs() < 1e-12);
    let p: [f64; 2] = [3.0 / 8.0, 5.0 / 8.0];
    let h = -(p[0] * p[0].ln() + p[1] * p[1].ln()) / 2f64.ln();
    assert!((m.entropy_norm - h).abs() < 1e-12);
    assert!((m.entropy_norm - 0.954).abs() < 5e-4);
}

#[test]
fn silhouette_geometry_fixture() {
    let x = ndarray::array![[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
    let v = cluster_validity(x.view(), &[0, 0, 1, 1], "visual").unwrap();
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let reference = support::silhouette_reference(&rows, &[0, 0, 1, 1]).unwrap();
    // a = 1 and b is the mean distance to the other pair, (10 + sqrt(101)) / 2
    assert!((v.silhouette - reference).abs() < 1e-12);
    assert!((v.silhouette - 0.900_248_757_758_219_4).abs() < 1e-12);
    assert!(opt_close(v.ch, support::ch_reference(&rows, &[0, 0, 1, 1])));
    assert!(opt_close(v.db, support::db_reference(&rows, &[0, 0, 1, 1])));
}

#[test]
fn npmi_five_document_fixture() {
    let docs = ["war army", "war army vote", "war", "vote goal", "goal"];
    // p(war) = 3/5, p(army) = 2/5, p(war, army) = 2/5
    let pwa: f64 = 0.4 + 1e-12;
    let war_army = (pwa.ln() - 0.6f64.ln() - 0.4f64.ln()) / -pwa.ln();
    // p(vote) = 2/5, p(goal) = 2/5, p(vote, goal) = 1/5
    let pvg: f64 = 0.2 + 1e-12;
    let vote_goal = (pvg.ln() - 0.4f64.ln() - 0.4f64.ln()) / -pvg.ln();
    let topics = vec![vec!["war".to_string(), "army".into()], vec!["vote".to_string(), "goal".into()]];
    let got = npmi(&topics, &docs, 1e-12).value.unwrap();
    assert!((got - (war_army + vote_goal) / 2.0).abs() < 1e-9);
}

#[test]
fn we_three_word_fixture() {
    let table = WordVectorTable::<f64>::parse("a 1 0 0\nb 1 1 0\nc 0 0 1\n").unwrap();
    let want = (1.0 / 2f64.sqrt() + 0.0 + 0.0) / 3.0;
    let got = we_alignment(&[vec!["a".into(), "b".into(), "c".into()]], &table).value.unwrap();
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn iec_two_topic_fixture() {
    let x = ndarray::array![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 2.0], [3.0, 3.0]];
    let labels = [0, 0, 1, 1, 1];
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let t0 = support::cos(&rows[0], &rows[1]);
    let t1 = (support::cos(&rows[2], &rows[3]) + support::cos(&rows[2], &rows[4]) + support::cos(&rows[3], &rows[4])) / 3.0;
    assert!((iec(x.view(), &labels).unwrap() - (t0 + t1) / 2.0).abs() < 1e-9);
}

fn relabel(labels: &[i64], perm: &[i64]) -> Vec<i64> {
    labels.iter().map(|&l| if l < 0 { l } else { perm[l as usize] }).collect()
}

#[test]
fn label_permutation_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for _ in 0..200 {
        let inst = instance(&mut rng);
        let mut perm: Vec<i64> = (0..5).collect();
        perm.shuffle(&mut rng);
        let other = relabel(&inst.labels, &perm);
        let a = structure_metrics::<f64>(&inst.labels, &inst.videos, TransitionOptions::default());
        let b = structure_metrics::<f64>(&other, &inst.videos, TransitionOptions::default());
        assert!(support::close(a.entropy_norm, b.entropy_norm, TOL));
        assert!(support::close(a.gini, b.gini, TOL));
        assert_eq!(a.transition_rate, b.transition_rate);
        assert_eq!(a.noise_ratio, b.noise_ratio);
        let va = cluster_validity(inst.x.view(), &inst.labels, "x");
        let vb = cluster_validity(inst.x.view(), &other, "x");
        match (va, vb) {
            (Some(p), Some(q)) => {
                assert!(support::close(p.silhouette, q.silhouette, TOL));
                assert!(opt_close(p.ch, q.ch));
                assert!(opt_close(p.db, q.db));
            }
            (None, None) => {}
            _ => panic!("definedness changed"),
        }
        assert!(opt_close(iec(inst.x.view(), &inst.labels), iec(inst.x.view(), &other)));
    }
}

#[test]
fn reversing_a_video_keeps_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..200 {
        let inst = instance(&mut rng);
        let mut reversed = Vec::new();
        let mut start = 0;
        for &len in &inst.videos {
            reversed.extend(inst.labels[start..start + len].iter().rev());
            start += len;
        }
        let a = structure_metrics::<f64>(&inst.labels, &inst.videos, TransitionOptions::default());
        let b = structure_metrics::<f64>(&reversed, &inst.videos, TransitionOptions::default());
        assert_eq!(a, b);
    }
}

/// Random orthogonal matrix via Gram-Schmidt.
fn orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Array2<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &q {
            let p = support::dot(&v, u);
            for i in 0..d {
                v[i] -= p * u[i];
            }
        }
        let n = support::dot(&v, &v).sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Array2::from_shape_vec((d, d), q.concat()).unwrap()
}

#[test]
fn orthogonal_maps_preserve_validity_and_iec() {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    for _ in 0..200 {
        let inst = instance(&mut rng);
        let q = orthogonal(&mut rng, inst.x.ncols());
        let y = inst.x.dot(&q);
        let (a, b) = (cluster_validity(inst.x.view(), &inst.labels, "x"), cluster_validity(y.view(), &inst.labels, "x"));
        match (a, b) {
            (Some(p), Some(r)) => {
                assert!(support::close(p.silhouette, r.silhouette, 1e-8));
                assert!(opt_close_tol(p.ch, r.ch, 1e-8));
                assert!(opt_close_tol(p.db, r.db, 1e-8));
            }
            (None, None) => {}
            _ => panic!("definedness changed"),
        }
        let (p, r) = (iec(inst.x.view(), &inst.labels), iec(y.view(), &inst.labels));
        assert_eq!(p.is_some(), r.is_some());
        if let (Some(p), Some(r)) = (p, r) {
            assert!((p - r).abs() < 1e-9);
        }
    }
}

#[test]
fn aggregate_examples() {
    let r = |n: f64| std::collections::BTreeMap::from([("n_topics".to_string(), Some(n))]);
    assert_eq!(aggregate(&[r(2.0), r(4.0)])["n_topics"].mean, Some(3.0));
    assert_eq!(aggregate(&[r(7.0)])["n_topics"].mean, Some(7.0));
}
