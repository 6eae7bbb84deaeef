//! Dataset container.

use crate::error::{Error, Result};
use crate::scalar::{cast_matrix, Matrix, Real};

/// Points-by-features matrix with optional integer class labels.
///
/// Invariants are checked at construction: at least two points, at least one
/// feature, all entries finite, and one label per point when labels exist.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix<T: Real = f64> {
    values: Matrix<T>,
    labels: Option<Vec<usize>>,
    name: String,
}

impl<T: Real> DataMatrix<T> {
    pub fn new(values: Matrix<T>, labels: Option<Vec<usize>>, name: impl Into<String>) -> Result<Self> {
        let (n, d) = values.shape();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 points, got {n}")));
        }
        if d < 1 {
            return Err(Error::InvalidData("need at least 1 feature".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidData(format!("{} labels for {n} points", l.len())));
            }
        }
        Ok(Self {
            values,
            labels,
            name: name.into(),
        })
    }

    /// Unlabeled matrix with an empty name.
    pub fn from_values(values: Matrix<T>) -> Result<Self> {
        Self::new(values, None, "")
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(self, labels: Option<Vec<usize>>) -> Result<Self> {
        Self::new(self.values, labels, self.name)
    }

    /// Rows `idx` (in that order), labels carried along.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let values = self.values.select_rows(idx.iter());
        let labels = self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect());
        Self::new(values, labels, self.name.clone())
    }

    /// Same points, values replaced (e.g. after a feature-space transform).
    pub fn map_values(&self, values: Matrix<T>) -> Result<Self> {
        if values.nrows() != self.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows replacing {}",
                values.nrows(),
                self.n_points()
            )));
        }
        Self::new(values, self.labels.clone(), self.name.clone())
    }

    pub fn cast<U: Real>(&self) -> DataMatrix<U> {
        DataMatrix {
            values: cast_matrix(&self.values),
            labels: self.labels.clone(),
            name: self.name.clone(),
        }
    }

    pub fn into_parts(self) -> (Matrix<T>, Option<Vec<usize>>, String) {
        (self.values, self.labels, self.name)
    }
}
