use crate::error::{Error, Result};
use crate::neighbors::knn;
use crate::scalar::{Matrix, Real};

use super::knn::majority_vote;

/// Reconstructs each test point from raw training features: the mean of
/// `train_data` over those of its `k` nearest `train_aligned` rows that carry
/// the neighborhood's majority label.
pub fn class_average_reconstruction<T: Real>(
    test_aligned: &Matrix<T>,
    train_aligned: &Matrix<T>,
    train_data: &Matrix<T>,
    train_labels: &[usize],
    k: usize,
) -> Result<Matrix<T>> {
    if train_data.nrows() != train_aligned.nrows() || train_labels.len() != train_aligned.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} aligned training rows, {} data rows, {} labels",
            train_aligned.nrows(),
            train_data.nrows(),
            train_labels.len()
        )));
    }
    let neighbors = knn(test_aligned, train_aligned, k, false)?;
    let mut out = Matrix::zeros(test_aligned.nrows(), train_data.ncols());
    for (i, nb) in neighbors.iter().enumerate() {
        let label = majority_vote(nb, train_labels);
        let members: Vec<usize> = nb
            .iter()
            .map(|&(j, _)| j)
            .filter(|&j| train_labels[j] == label)
            .collect();
        let mut row = out.row_mut(i);
        for &j in &members {
            row += train_data.row(j);
        }
        row /= T::from_usize_lossy(members.len());
    }
    Ok(out)
}

/// Pearson correlation of two equal-length sequences; zero when either is constant.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let mb = b.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x.as_f64() - ma, y.as_f64() - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Mean over rows of the Pearson correlation between matching rows.
pub fn mean_row_correlation<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "row correlation needs equal shapes");
    let (at, bt) = (a.transpose(), b.transpose());
    let total: f64 = (0..a.nrows())
        .map(|i| pearson(at.column(i).as_slice(), bt.column(i).as_slice()))
        .sum();
    total / a.nrows() as f64
}
