use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::{Matrix, Real};

/// Haar-distributed random orthogonal matrix: QR of a standard Gaussian
/// matrix with the columns of `Q` signed so that `diag(R) > 0`.
pub fn random_orthogonal<T: Real>(d: usize, rng: &mut Rng) -> Result<Matrix<T>> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let qr = rng.normal_matrix::<T>(d, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < T::zero() {
            col.neg_mut();
        }
    }
    Ok(q)
}

/// `o0` with `round(p·d/100)` uniformly chosen columns replaced by the
/// matching identity columns. `p` is the percentage of preserved features.
pub fn partial_corruption<T: Real>(o0: &Matrix<T>, preserved_pct: f64, rng: &mut Rng) -> Result<Matrix<T>> {
    let d = o0.nrows();
    if o0.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "corruption matrix is {}x{}",
            d,
            o0.ncols()
        )));
    }
    if !(0.0..=100.0).contains(&preserved_pct) {
        return Err(Error::InvalidParameter(format!(
            "preserved percentage must be in [0, 100], got {preserved_pct}"
        )));
    }
    let m = (preserved_pct * d as f64 / 100.0).round() as usize;
    let mut out = o0.clone();
    for c in rng.sample_indices(d, m) {
        out.column_mut(c).fill(T::zero());
        out[(c, c)] = T::one();
    }
    Ok(out)
}

/// A reproducible corruption: dimension, percentage preserved and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub d: usize,
    pub preserved_pct: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn matrix<T: Real>(&self) -> Result<Matrix<T>> {
        let mut rng = Rng::new(self.seed);
        sample_corruption(self.d, self.preserved_pct, &mut rng)
    }
}

/// Draws `O₀` and then the partial corruption from the same stream.
pub(crate) fn sample_corruption<T: Real>(d: usize, preserved_pct: f64, rng: &mut Rng) -> Result<Matrix<T>> {
    let o0 = random_orthogonal(d, rng)?;
    partial_corruption(&o0, preserved_pct, rng)
}
