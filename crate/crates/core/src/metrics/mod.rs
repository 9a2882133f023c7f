//! Evaluation of a topic labelling: structure, cluster validity per embedding
//! space, lexical coherence, diversity, word-embedding alignment and
//! embedding coherence. Corpus reports are unweighted means over videos.

mod semantic;
mod structure;
mod validity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use semantic::{
    npmi, topic_diversity, we_alignment, NpmiResult, WeResult, WordVectorTable, NPMI_EPSILON,
};
pub use structure::{structure_metrics, StructureMetrics, TransitionOptions};
pub use validity::{cluster_validity, iec, ClusterValidity};

/// Every metric for one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMetrics {
    pub structure: StructureMetrics<f64>,
    /// Keyed by embedding space; `None` when fewer than two clusters exist.
    pub validity: BTreeMap<String, Option<ClusterValidity<f64>>>,
    pub npmi: NpmiResult<f64>,
    pub diversity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub we: Option<WeResult<f64>>,
    pub iec: BTreeMap<String, Option<f64>>,
}

impl VideoMetrics {
    /// Flat `name -> value` view used for aggregation.
    pub fn flatten(&self) -> BTreeMap<String, Option<f64>> {
        let s = &self.structure;
        let mut out = BTreeMap::from([
            ("noise_ratio".to_string(), Some(s.noise_ratio)),
            ("transition_rate".to_string(), Some(s.transition_rate)),
            ("entropy_norm".to_string(), Some(s.entropy_norm)),
            ("gini".to_string(), Some(s.gini)),
            ("n_topics".to_string(), Some(s.n_topics as f64)),
            ("npmi".to_string(), self.npmi.value),
            ("diversity".to_string(), self.diversity),
        ]);
        if let Some(we) = &self.we {
            out.insert("we".into(), we.value);
        }
        for (space, v) in &self.validity {
            let v = v.as_ref();
            out.insert(format!("ch.{space}"), v.and_then(|v| v.ch));
            out.insert(format!("silhouette.{space}"), v.map(|v| v.silhouette));
            out.insert(format!("db.{space}"), v.and_then(|v| v.db));
        }
        for (space, v) in &self.iec {
            out.insert(format!("iec.{space}"), *v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateValue {
    pub mean: Option<f64>,
    pub present: usize,
    pub total: usize,
}

/// Unweighted mean of each metric over the videos where it is defined.
pub fn aggregate(reports: &[BTreeMap<String, Option<f64>>]) -> BTreeMap<String, AggregateValue> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in reports {
        for (k, v) in r {
            let e = acc.entry(k.clone()).or_insert((0.0, 0));
            if let Some(v) = v {
                e.0 += v;
                e.1 += 1;
            }
        }
    }
    acc.into_iter()
        .map(|(k, (sum, present))| {
            (
                k,
                AggregateValue {
                    mean: (present > 0).then(|| sum / present as f64),
                    present,
                    total: reports.len(),
                },
            )
        })
        .collect()
}

/// Human-readable definitions emitted alongside every report.
pub fn formula_definitions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("noise_ratio", "|{i : label_i = -1}| / N"),
        (
            "transition_rate",
            "fraction of consecutive same-video segment pairs with differing labels; the outlier label counts as a label",
        ),
        ("entropy_norm", "H(p) / ln(T) over non-outlier topic proportions; 0 when T <= 1"),
        ("gini", "sum_ij |s_i - s_j| / (2 T^2 mean(s)) over non-outlier topic sizes s"),
        ("n_topics", "number of distinct non-outlier labels"),
        ("ch", "[tr(B) / (T - 1)] / [tr(W) / (n - T)], Euclidean, outliers excluded"),
        (
            "silhouette",
            "mean over points of (b - a) / max(a, b) with mean intra (a) and nearest mean inter-cluster (b) distances; 0 for singletons",
        ),
        ("db", "mean over clusters of max_{j != i} (sigma_i + sigma_j) / d(c_i, c_j), sigma = mean distance to centroid"),
        (
            "npmi",
            "document-level [ln(p_ij + eps) - ln p_i - ln p_j] / -ln(p_ij + eps), eps = 1e-12, averaged over top-word pairs per topic then over topics",
        ),
        ("diversity", "unique top words / (T * k)"),
        ("we", "mean pairwise cosine of top-word vectors per topic, averaged over topics with >= 2 covered words"),
        ("iec", "mean within-topic pairwise cosine of segment embeddings, averaged over topics with >= 2 members"),
        ("aggregate", "unweighted mean over videos where the metric is defined"),
    ])
}
