//! Deterministic dimensionality reduction ahead of density clustering.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::Result;
use crate::linalg;
use crate::scalar::Scalar;

/// Output of a reducer.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<F> {
    pub embedding: Array2<F>,
    pub warning: Option<String>,
}

/// Maps `N x d` rows to a lower-dimensional space. Implementations must be
/// deterministic.
pub trait Reducer<F: Scalar> {
    fn name(&self) -> &'static str;
    fn reduce(&self, x: ArrayView2<'_, F>) -> Result<Reduction<F>>;
}

/// PCA on L2-normalized rows (cosine geometry).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcaReducer {
    pub components: usize,
}

impl<F: Scalar> Reducer<F> for PcaReducer {
    fn name(&self) -> &'static str {
        "pca-cosine"
    }

    fn reduce(&self, x: ArrayView2<'_, F>) -> Result<Reduction<F>> {
        let (n, d) = x.dim();
        let mut c = self.components.min(d);
        let mut warning = None;
        if n < self.components {
            c = c.min(n.saturating_sub(1));
            warning = Some(format!(
                "{n} rows cannot support {} components; using {c}",
                self.components
            ));
        }
        let normalized = linalg::normalize_rows(x);
        let model = PcaModel::fit(normalized.view(), c);
        Ok(Reduction {
            embedding: model.transform(normalized.view()),
            warning,
        })
    }
}

/// Fitted principal components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<F> {
    pub mean: Array1<F>,
    /// `c x d`, one unit-norm component per row.
    pub components: Array2<F>,
    /// All `d` covariance eigenvalues, descending. Covariance uses `N - 1`.
    pub eigenvalues: Vec<F>,
}

impl<F: Scalar> PcaModel<F> {
    /// Fits `c` components. Each component's largest-magnitude loading is
    /// made positive (the first such loading on ties).
    pub fn fit(x: ArrayView2<'_, F>, c: usize) -> Self {
        let (n, d) = x.dim();
        let mean = if n == 0 {
            Array1::zeros(d)
        } else {
            x.mean_axis(ndarray::Axis(0)).expect("non-empty")
        };
        let denom = (n.max(2) - 1) as f64;
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for row in x.rows() {
            let centered: Vec<f64> = row
                .iter()
                .zip(mean.iter())
                .map(|(&v, &m)| (v - m).to_f64_lossy())
                .collect();
            for a in 0..d {
                let ca = centered[a];
                if ca == 0.0 {
                    continue;
                }
                for b in a..d {
                    cov[(a, b)] += ca * centered[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / denom;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .total_cmp(&eig.eigenvalues[i])
                .then(i.cmp(&j))
        });

        let c = c.min(d);
        let mut components = Array2::zeros((c, d));
        for (k, &col) in order.iter().take(c).enumerate() {
            let v = eig.eigenvectors.column(col);
            let mut pivot = 0;
            for i in 1..d {
                if v[i].abs() > v[pivot].abs() {
                    pivot = i;
                }
            }
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..d {
                components[[k, i]] = F::lit(sign * v[i]);
            }
        }
        let eigenvalues = order
            .iter()
            .map(|&i| F::lit(eig.eigenvalues[i].max(0.0)))
            .collect();
        PcaModel {
            mean,
            components,
            eigenvalues,
        }
    }

    /// Projects centered rows onto the components.
    pub fn transform(&self, x: ArrayView2<'_, F>) -> Array2<F> {
        let centered = &x - &self.mean;
        centered.dot(&self.components.t())
    }
}
