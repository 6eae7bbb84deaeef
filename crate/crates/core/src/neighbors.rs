//! Brute-force Euclidean nearest neighbors.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{cross_sq_dists, Matrix, Real};

/// One neighbor: reference row index and squared distance.
pub type Neighbor<T> = (usize, T);

fn by_distance_then_index<T: Real>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

/// The `k` nearest rows of `reference` for every row of `queries`, closest
/// first; equal distances are ordered by index. With `exclude_self`, row `i`
/// of the reference is never a neighbor of query `i` (queries and reference
/// are the same point set).
pub fn knn<T: Real>(
    queries: &Matrix<T>,
    reference: &Matrix<T>,
    k: usize,
    exclude_self: bool,
) -> Result<Vec<Vec<Neighbor<T>>>> {
    if queries.ncols() != reference.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "queries have {} columns, reference has {}",
            queries.ncols(),
            reference.ncols()
        )));
    }
    let available = reference.nrows() - usize::from(exclude_self);
    if k == 0 || k > available {
        return Err(Error::InvalidParameter(format!(
            "k={k} neighbors requested from {available} candidates"
        )));
    }
    let d2 = cross_sq_dists(queries, reference);
    let mut out = Vec::with_capacity(queries.nrows());
    let mut row: Vec<Neighbor<T>> = Vec::with_capacity(reference.nrows());
    for i in 0..queries.nrows() {
        row.clear();
        row.extend(
            (0..reference.nrows())
                .filter(|&j| !(exclude_self && j == i))
                .map(|j| (j, d2[(i, j)])),
        );
        if k < row.len() {
            row.select_nth_unstable_by(k - 1, by_distance_then_index);
        }
        let mut best = row[..k].to_vec();
        best.sort_by(by_distance_then_index);
        out.push(best);
    }
    Ok(out)
}

/// Neighbor indices only.
pub fn knn_indices<T: Real>(
    queries: &Matrix<T>,
    reference: &Matrix<T>,
    k: usize,
    exclude_self: bool,
) -> Result<Vec<Vec<usize>>> {
    Ok(knn(queries, reference, k, exclude_self)?
        .into_iter()
        .map(|r| r.into_iter().map(|(j, _)| j).collect())
        .collect())
}
