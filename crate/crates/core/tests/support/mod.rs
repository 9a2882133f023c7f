//! Reference implementations written straight from the textbook definitions.
//! They favour clarity over speed and share no code with the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(b.abs())
}

// ---------------------------------------------------------------- selection

/// Step-by-step replay of the diversity-penalized greedy rule.
pub fn mmr_reference(
    features: &[Vec<f64>],
    relevance: &[f64],
    k: usize,
    nu: f64,
    dedup: f64,
) -> Vec<usize> {
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < k {
        let mut best: Option<usize> = None;
        let mut best_score = f64::NEG_INFINITY;
        for j in 0..features.len() {
            if selected.contains(&j) {
                continue;
            }
            let sims: Vec<f64> = selected.iter().map(|&s| cos(&features[j], &features[s])).collect();
            if sims.iter().any(|&s| s > dedup) {
                continue;
            }
            let score = if selected.is_empty() {
                relevance[j]
            } else {
                let max = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (1.0 - nu) * relevance[j] - nu * max
            };
            if best.is_none() || score > best_score {
                best = Some(j);
                best_score = score;
            }
        }
        match best {
            Some(j) => selected.push(j),
            None => break,
        }
    }
    selected
}

pub fn center_reference(tau: f64, start: f64, end: f64) -> f64 {
    let m = (start + end) / 2.0;
    let d = (tau - m).abs() / (0.5 * (end - start));
    1.0 - if d < 1.0 { d } else { 1.0 }
}

// ---------------------------------------------------------------- partitions

/// Adjusted Rand index from the contingency table.
pub fn ari(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len() as f64;
    let mut table: HashMap<(i64, i64), f64> = HashMap::new();
    let mut ra: HashMap<i64, f64> = HashMap::new();
    let mut rb: HashMap<i64, f64> = HashMap::new();
    for i in 0..a.len() {
        *table.entry((a[i], b[i])).or_default() += 1.0;
        *ra.entry(a[i]).or_default() += 1.0;
        *rb.entry(b[i]).or_default() += 1.0;
    }
    let c2 = |x: f64| x * (x - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// True when the two labelings induce the same partition (ids may differ).
pub fn same_partition(a: &[i64], b: &[i64]) -> bool {
    let mut fwd: HashMap<i64, i64> = HashMap::new();
    let mut back: HashMap<i64, i64> = HashMap::new();
    for i in 0..a.len() {
        if *fwd.entry(a[i]).or_insert(b[i]) != b[i] || *back.entry(b[i]).or_insert(a[i]) != a[i] {
            return false;
        }
    }
    true
}

pub struct Blobs {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
}

/// Isotropic Gaussian blobs with centres at least `separation * sigma` apart.
pub fn planted_blobs(
    rng: &mut ChaCha8Rng,
    n_blobs: usize,
    sizes: std::ops::RangeInclusive<usize>,
    dims: usize,
    separation: f64,
) -> Blobs {
    let sigma = 1.0;
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut centres: Vec<Vec<f64>> = Vec::new();
    while centres.len() < n_blobs {
        let c: Vec<f64> = (0..dims).map(|_| rng.gen_range(-40.0..40.0)).collect();
        if centres.iter().all(|o| dist(o, &c) >= separation * sigma * 2.0) {
            centres.push(c);
        }
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (k, c) in centres.iter().enumerate() {
        let size = rng.gen_range(sizes.clone());
        for _ in 0..size {
            points.push(c.iter().map(|&x| x + normal.sample(rng)).collect());
            labels.push(k as i64);
        }
    }
    Blobs { points, labels }
}

// ---------------------------------------------------------------- eigen

/// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues sorted
/// descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p][q] * a[p][q];
                }
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Sample covariance with the `N - 1` denominator.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j] / n as f64;
        }
    }
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n as f64 - 1.0);
            }
        }
    }
    c
}

// ---------------------------------------------------------------- metrics

pub struct StructureRef {
    pub noise: f64,
    pub transition: f64,
    pub entropy: f64,
    pub gini: f64,
    pub topics: usize,
}

pub fn structure_reference(labels: &[i64], videos: &[usize], exclude_outliers: bool) -> StructureRef {
    let n = labels.len() as f64;
    let noise = labels.iter().filter(|&&l| l == -1).count() as f64 / n;
    let mut pairs = 0.0;
    let mut diff = 0.0;
    let mut start = 0;
    for &len in videos {
        for i in start + 1..start + len {
            if exclude_outliers && (labels[i] == -1 || labels[i - 1] == -1) {
                continue;
            }
            pairs += 1.0;
            if labels[i] != labels[i - 1] {
                diff += 1.0;
            }
        }
        start += len;
    }
    let mut sizes: HashMap<i64, f64> = HashMap::new();
    for &l in labels {
        if l != -1 {
            *sizes.entry(l).or_default() += 1.0;
        }
    }
    let t = sizes.len();
    let total: f64 = sizes.values().sum();
    let entropy = if t <= 1 {
        0.0
    } else {
        -sizes.values().map(|&s| (s / total) * (s / total).ln()).sum::<f64>() / (t as f64).ln()
    };
    // Sorted-order form of the Gini coefficient.
    let gini = if t == 0 {
        0.0
    } else {
        let mut s: Vec<f64> = sizes.values().cloned().collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tn = t as f64;
        let weighted: f64 = s.iter().enumerate().map(|(i, &x)| (i as f64 + 1.0) * x).sum();
        (2.0 * weighted) / (tn * total) - (tn + 1.0) / tn
    };
    StructureRef {
        noise,
        transition: if pairs == 0.0 { 0.0 } else { diff / pairs },
        entropy,
        gini,
        topics: t,
    }
}

fn groups(labels: &[i64]) -> Vec<Vec<usize>> {
    let mut g: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != -1 {
            g.entry(l).or_default().push(i);
        }
    }
    g.into_values().collect()
}

fn centroid(x: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let d = x[0].len();
    let mut c = vec![0.0; d];
    for &i in idx {
        for j in 0..d {
            c[j] += x[i][j];
        }
    }
    c.iter().map(|v| v / idx.len() as f64).collect()
}

/// CH through the pairwise-distance decomposition of total scatter.
pub fn ch_reference(x: &[Vec<f64>], labels: &[i64]) -> Option<f64> {
    let g = groups(labels);
    let t = g.len();
    let members: Vec<usize> = g.iter().flatten().cloned().collect();
    let n = members.len();
    if t < 2 || n == t {
        return None;
    }
    let sq = |i: usize, j: usize| dist(&x[i], &x[j]).powi(2);
    let mut total = 0.0;
    for &i in &members {
        for &j in &members {
            total += sq(i, j);
        }
    }
    total /= 2.0 * n as f64;
    let mut within = 0.0;
    for grp in &g {
        let mut s = 0.0;
        for &i in grp {
            for &j in grp {
                s += sq(i, j);
            }
        }
        within += s / (2.0 * grp.len() as f64);
    }
    if within == 0.0 {
        return None;
    }
    let between = total - within;
    Some((between / (t as f64 - 1.0)) / (within / (n - t) as f64))
}

pub fn silhouette_reference(x: &[Vec<f64>], labels: &[i64]) -> Option<f64> {
    let g = groups(labels);
    if g.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut n = 0.0;
    for (gi, grp) in g.iter().enumerate() {
        for &i in grp {
            n += 1.0;
            if grp.len() == 1 {
                continue;
            }
            let a = grp.iter().filter(|&&j| j != i).map(|&j| dist(&x[i], &x[j])).sum::<f64>()
                / (grp.len() - 1) as f64;
            let mut b = f64::INFINITY;
            for (gj, other) in g.iter().enumerate() {
                if gj != gi {
                    let m = other.iter().map(|&j| dist(&x[i], &x[j])).sum::<f64>() / other.len() as f64;
                    b = b.min(m);
                }
            }
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Some(total / n)
}

pub fn db_reference(x: &[Vec<f64>], labels: &[i64]) -> Option<f64> {
    let g = groups(labels);
    if g.len() < 2 {
        return None;
    }
    let cs: Vec<Vec<f64>> = g.iter().map(|grp| centroid(x, grp)).collect();
    let sig: Vec<f64> = g
        .iter()
        .zip(&cs)
        .map(|(grp, c)| grp.iter().map(|&i| dist(&x[i], c)).sum::<f64>() / grp.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..g.len() {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..g.len() {
            if i == j {
                continue;
            }
            let d = dist(&cs[i], &cs[j]);
            if d == 0.0 {
                return None;
            }
            worst = worst.max((sig[i] + sig[j]) / d);
        }
        total += worst;
    }
    Some(total / g.len() as f64)
}

pub fn iec_reference(x: &[Vec<f64>], labels: &[i64]) -> Option<f64> {
    let mut per_topic = Vec::new();
    for grp in groups(labels) {
        if grp.len() < 2 {
            continue;
        }
        let mut s = 0.0;
        let mut c = 0.0;
        for a in 0..grp.len() {
            for b in 0..grp.len() {
                if a < b {
                    s += cos(&x[grp[a]], &x[grp[b]]);
                    c += 1.0;
                }
            }
        }
        per_topic.push(s / c);
    }
    if per_topic.is_empty() {
        None
    } else {
        Some(per_topic.iter().sum::<f64>() / per_topic.len() as f64)
    }
}

fn doc_words(doc: &str) -> HashSet<String> {
    doc.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

pub fn npmi_reference(topics: &[Vec<String>], docs: &[&str], eps: f64) -> Option<f64> {
    let sets: Vec<HashSet<String>> = docs.iter().map(|d| doc_words(d)).collect();
    let n = docs.len() as f64;
    let p = |ws: &[&str]| sets.iter().filter(|s| ws.iter().all(|w| s.contains(*w))).count() as f64 / n;
    let mut topic_scores = Vec::new();
    for words in topics {
        let mut scores = Vec::new();
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let (wi, wj) = (words[i].as_str(), words[j].as_str());
                let (pi, pj) = (p(&[wi]), p(&[wj]));
                if pi == 0.0 || pj == 0.0 {
                    continue;
                }
                let pij = p(&[wi, wj]) + eps;
                scores.push(if pij >= 1.0 {
                    1.0
                } else {
                    (pij.ln() - pi.ln() - pj.ln()) / -pij.ln()
                });
            }
        }
        if !scores.is_empty() {
            topic_scores.push(scores.iter().sum::<f64>() / scores.len() as f64);
        }
    }
    if topic_scores.is_empty() {
        None
    } else {
        Some(topic_scores.iter().sum::<f64>() / topic_scores.len() as f64)
    }
}

pub fn diversity_reference(topics: &[Vec<String>], k: usize) -> f64 {
    let unique: BTreeSet<&String> = topics.iter().flatten().collect();
    unique.len() as f64 / (topics.len() * k) as f64
}

pub fn we_reference(topics: &[Vec<String>], table: &HashMap<String, Vec<f64>>) -> Option<f64> {
    let mut per = Vec::new();
    for words in topics {
        let vs: Vec<&Vec<f64>> = words.iter().filter_map(|w| table.get(w)).collect();
        if vs.len() < 2 {
            continue;
        }
        let mut s = 0.0;
        let mut c = 0.0;
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                s += cos(vs[a], vs[b]);
                c += 1.0;
            }
        }
        per.push(s / c);
    }
    if per.is_empty() {
        None
    } else {
        Some(per.iter().sum::<f64>() / per.len() as f64)
    }
}
