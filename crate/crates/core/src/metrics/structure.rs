use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureMetrics<F> {
    pub noise_ratio: F,
    pub transition_rate: F,
    pub entropy_norm: F,
    pub gini: F,
    pub n_topics: usize,
    /// The video had no segments; all values are zero.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransitionOptions {
    /// Skip consecutive pairs where either side is an outlier.
    pub exclude_outliers: bool,
}

/// Topic sizes per non-outlier label, in label order.
pub(crate) fn topic_sizes(labels: &[i64]) -> Vec<usize> {
    let mut sizes: BTreeMap<i64, usize> = BTreeMap::new();
    for &l in labels.iter().filter(|&&l| l >= 0) {
        *sizes.entry(l).or_default() += 1;
    }
    sizes.into_values().collect()
}

/// Structure of a labelling. `video_lengths` splits `labels` into videos;
/// transitions are only counted inside a video.
pub fn structure_metrics<F: Scalar>(
    labels: &[i64],
    video_lengths: &[usize],
    opts: TransitionOptions,
) -> StructureMetrics<F> {
    let n = labels.len();
    if n == 0 {
        return StructureMetrics {
            noise_ratio: F::zero(),
            transition_rate: F::zero(),
            entropy_norm: F::zero(),
            gini: F::zero(),
            n_topics: 0,
            empty: true,
        };
    }
    debug_assert_eq!(video_lengths.iter().sum::<usize>(), n);
    let noise = labels.iter().filter(|&&l| l < 0).count();

    let mut pairs = 0usize;
    let mut changes = 0usize;
    let mut offset = 0;
    for &len in video_lengths {
        let video = &labels[offset..offset + len];
        for w in video.windows(2) {
            if opts.exclude_outliers && (w[0] < 0 || w[1] < 0) {
                continue;
            }
            pairs += 1;
            if w[0] != w[1] {
                changes += 1;
            }
        }
        offset += len;
    }

    let sizes = topic_sizes(labels);
    let t = sizes.len();
    let total: usize = sizes.iter().sum();

    let entropy_norm = if t <= 1 {
        F::zero()
    } else {
        let h = sizes.iter().fold(F::zero(), |h, &s| {
            let p = F::from_usize_lossy(s) / F::from_usize_lossy(total);
            h - p * p.ln()
        });
        h / F::from_usize_lossy(t).ln()
    };

    let gini = if t == 0 {
        F::zero()
    } else {
        let mut abs_diff = F::zero();
        for &a in &sizes {
            for &b in &sizes {
                abs_diff += F::from_usize_lossy(a.abs_diff(b));
            }
        }
        let mean = F::from_usize_lossy(total) / F::from_usize_lossy(t);
        abs_diff / (F::lit(2.0) * F::from_usize_lossy(t * t) * mean)
    };

    StructureMetrics {
        noise_ratio: F::from_usize_lossy(noise) / F::from_usize_lossy(n),
        transition_rate: if pairs == 0 {
            F::zero()
        } else {
            F::from_usize_lossy(changes) / F::from_usize_lossy(pairs)
        },
        entropy_norm,
        gini,
        n_topics: t,
        empty: false,
    }
}
