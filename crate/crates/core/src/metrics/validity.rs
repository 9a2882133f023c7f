use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::scalar::{self, Scalar};

/// Calinski-Harabasz, Silhouette and Davies-Bouldin in one space, Euclidean,
/// outliers excluded. `None` fields are undefined for this labelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterValidity<F> {
    pub space: String,
    pub ch: Option<F>,
    pub silhouette: F,
    pub db: Option<F>,
    pub n_clusters: usize,
    pub n_points: usize,
    /// Singleton clusters, zero within-cluster scatter or coincident centroids.
    pub degenerate: bool,
}

/// Returns `None` when fewer than two non-outlier clusters exist.
pub fn cluster_validity<F: Scalar>(
    x: ArrayView2<'_, F>,
    labels: &[i64],
    space: &str,
) -> Option<ClusterValidity<F>> {
    let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate().filter(|(_, &l)| l >= 0) {
        members.entry(l).or_default().push(i);
    }
    let t = members.len();
    if t < 2 {
        return None;
    }
    let groups: Vec<Vec<usize>> = members.into_values().collect();
    let rows = linalg::rows_of(x);
    let d = x.ncols();
    let n: usize = groups.iter().map(Vec::len).sum();
    let mut degenerate = groups.iter().any(|g| g.len() == 1);

    let centroids: Vec<Vec<F>> = groups
        .iter()
        .map(|g| linalg::column_mean(&g.iter().map(|&i| rows[i].as_slice()).collect::<Vec<_>>(), d))
        .collect();
    let all: Vec<&[F]> = groups.iter().flatten().map(|&i| rows[i].as_slice()).collect();
    let grand = linalg::column_mean(&all, d);

    let sq = |a: &[F], b: &[F]| {
        let e = scalar::euclidean(a, b);
        e * e
    };
    let between: F = groups
        .iter()
        .zip(&centroids)
        .map(|(g, c)| F::from_usize_lossy(g.len()) * sq(c, &grand))
        .sum();
    let within: F = groups
        .iter()
        .zip(&centroids)
        .map(|(g, c)| g.iter().map(|&i| sq(&rows[i], c)).sum::<F>())
        .sum();
    let ch = if n > t && within > F::zero() {
        Some((between / F::from_usize_lossy(t - 1)) / (within / F::from_usize_lossy(n - t)))
    } else {
        degenerate = true;
        None
    };

    let mut sil_sum = F::zero();
    for (gi, g) in groups.iter().enumerate() {
        for &i in g {
            if g.len() == 1 {
                continue;
            }
            let a = g
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| scalar::euclidean(&rows[i], &rows[j]))
                .sum::<F>()
                / F::from_usize_lossy(g.len() - 1);
            let b = groups
                .iter()
                .enumerate()
                .filter(|&(gj, _)| gj != gi)
                .map(|(_, h)| {
                    h.iter()
                        .map(|&j| scalar::euclidean(&rows[i], &rows[j]))
                        .sum::<F>()
                        / F::from_usize_lossy(h.len())
                })
                .fold(F::infinity(), F::min);
            let m = a.max(b);
            if m > F::zero() {
                sil_sum += (b - a) / m;
            }
        }
    }
    let silhouette = sil_sum / F::from_usize_lossy(n);

    let scatter: Vec<F> = groups
        .iter()
        .zip(&centroids)
        .map(|(g, c)| {
            g.iter().map(|&i| scalar::euclidean(&rows[i], c)).sum::<F>()
                / F::from_usize_lossy(g.len())
        })
        .collect();
    let mut db_sum = F::zero();
    let mut db_ok = true;
    for i in 0..t {
        let mut worst = F::neg_infinity();
        for j in (0..t).filter(|&j| j != i) {
            let dist = scalar::euclidean(&centroids[i], &centroids[j]);
            if dist == F::zero() {
                db_ok = false;
                break;
            }
            worst = worst.max((scatter[i] + scatter[j]) / dist);
        }
        db_sum += worst;
    }
    if !db_ok {
        degenerate = true;
    }

    Some(ClusterValidity {
        space: space.to_string(),
        ch,
        silhouette,
        db: db_ok.then(|| db_sum / F::from_usize_lossy(t)),
        n_clusters: t,
        n_points: n,
        degenerate,
    })
}

/// Mean within-topic pairwise cosine similarity, averaged over topics with at
/// least two members. Outliers are excluded.
pub fn iec<F: Scalar>(x: ArrayView2<'_, F>, labels: &[i64]) -> Option<F> {
    let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate().filter(|(_, &l)| l >= 0) {
        members.entry(l).or_default().push(i);
    }
    let rows = linalg::rows_of(x);
    let per_topic: Vec<F> = members
        .values()
        .filter(|g| g.len() >= 2)
        .map(|g| {
            let mut sum = F::zero();
            let mut pairs = 0usize;
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    sum += scalar::cosine(&rows[i], &rows[j]);
                    pairs += 1;
                }
            }
            sum / F::from_usize_lossy(pairs)
        })
        .collect();
    if per_topic.is_empty() {
        return None;
    }
    let k = F::from_usize_lossy(per_topic.len());
    Some(per_topic.into_iter().sum::<F>() / k)
}
