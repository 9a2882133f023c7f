//! Small dense helpers over `ndarray` rows.

use ndarray::{Array2, ArrayView2};

use crate::scalar::{self, Scalar};

/// Copy of `x` with every row L2-normalized (zero rows stay zero).
pub fn normalize_rows<F: Scalar>(x: ArrayView2<'_, F>) -> Array2<F> {
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        let n = row.iter().fold(F::zero(), |a, &v| a + v * v).sqrt();
        if n > F::zero() {
            row.mapv_inplace(|v| v / n);
        }
    }
    out
}

/// Full symmetric matrix of Euclidean distances between rows.
pub fn pairwise_euclidean<F: Scalar>(x: ArrayView2<'_, F>) -> Array2<F> {
    let n = x.nrows();
    let rows: Vec<Vec<F>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = scalar::euclidean(&rows[i], &rows[j]);
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Rows as owned vectors.
pub fn rows_of<F: Scalar>(x: ArrayView2<'_, F>) -> Vec<Vec<F>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Column means.
pub fn column_mean<F: Scalar>(rows: &[&[F]], dims: usize) -> Vec<F> {
    let mut mean = vec![F::zero(); dims];
    if rows.is_empty() {
        return mean;
    }
    for r in rows {
        for (m, &v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    let n = F::from_usize_lossy(rows.len());
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}
