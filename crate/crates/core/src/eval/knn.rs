use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::neighbors::{knn, Neighbor};
use crate::scalar::{Matrix, Real};

/// Most frequent label among `neighbors`. Ties go to the label whose voters
/// have the smaller total Euclidean distance, then to the lower label.
pub fn majority_vote<T: Real>(neighbors: &[Neighbor<T>], labels: &[usize]) -> usize {
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(j, d2) in neighbors {
        let e = tally.entry(labels[j]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d2.as_f64().sqrt();
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (&label, &(count, dist)) in &tally {
        let better = match best {
            None => true,
            Some((_, c, d)) => count > c || (count == c && dist < d),
        };
        if better {
            best = Some((label, count, dist));
        }
    }
    best.map(|b| b.0).unwrap_or(0)
}

/// k-nearest-neighbor label predictions for each test row.
pub fn knn_classify<T: Real>(
    train: &Matrix<T>,
    train_labels: &[usize],
    test: &Matrix<T>,
    k: usize,
) -> Result<Vec<usize>> {
    if train_labels.len() != train.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} training rows",
            train_labels.len(),
            train.nrows()
        )));
    }
    Ok(knn(test, train, k, false)?
        .iter()
        .map(|n| majority_vote(n, train_labels))
        .collect())
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "prediction and truth lengths differ");
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / pred.len() as f64
}

pub fn knn_accuracy<T: Real>(
    train: &Matrix<T>,
    train_labels: &[usize],
    test: &Matrix<T>,
    test_labels: &[usize],
    k: usize,
) -> Result<f64> {
    if test_labels.len() != test.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} test rows",
            test_labels.len(),
            test.nrows()
        )));
    }
    Ok(accuracy(&knn_classify(train, train_labels, test, k)?, test_labels))
}
