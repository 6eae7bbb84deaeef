use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::neighbors::knn_indices;
use crate::scalar::{Matrix, Real};

fn mean_overlap(a: &[Vec<usize>], b: &[Vec<usize>], k: usize) -> f64 {
    let total: usize = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let s: HashSet<usize> = x.iter().copied().collect();
            y.iter().filter(|j| s.contains(j)).count()
        })
        .sum();
    total as f64 / (k * a.len()) as f64
}

fn check(n_a: usize, n_b: usize, k: usize) -> Result<()> {
    if n_a != n_b {
        return Err(Error::DimensionMismatch(format!(
            "{n_a} vs {n_b} rows; overlap needs a row bijection"
        )));
    }
    if k == 0 || k >= n_a {
        return Err(Error::InvalidParameter(format!(
            "overlap needs 1 <= k < N, got k={k}, N={n_a}"
        )));
    }
    Ok(())
}

/// Mean fraction of shared indices between the k-neighborhoods of row `i`
/// in `a` and row `i` in `b`, each computed within its own embedding.
pub fn neighborhood_overlap<T: Real>(a: &Matrix<T>, b: &Matrix<T>, k: usize) -> Result<f64> {
    check(a.nrows(), b.nrows(), k)?;
    let na = knn_indices(a, a, k, true)?;
    let nb = knn_indices(b, b, k, true)?;
    Ok(mean_overlap(&na, &nb, k))
}

/// Like [`neighborhood_overlap`], but measured in a shared space: the
/// neighbors of `queries[i]` among the rows of `reference` are compared with
/// the neighbors of `reference[i]` among the other rows of `reference`.
/// Only embeddings that place both datasets in common coordinates score
/// above chance.
pub fn cross_neighborhood_overlap<T: Real>(queries: &Matrix<T>, reference: &Matrix<T>, k: usize) -> Result<f64> {
    check(queries.nrows(), reference.nrows(), k)?;
    let nq = knn_indices(queries, reference, k, false)?;
    let nr = knn_indices(reference, reference, k, true)?;
    Ok(mean_overlap(&nq, &nr, k))
}

/// Fraction of rows `i` whose nearest row of `b` is `b[i]`.
pub fn self_match_rate<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!("{} vs {} rows", a.nrows(), b.nrows())));
    }
    let nn = knn_indices(a, b, 1, false)?;
    Ok(nn.iter().enumerate().filter(|(i, n)| n[0] == *i).count() as f64 / a.nrows() as f64)
}
