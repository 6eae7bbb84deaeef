//! Mutual-nearest-neighbors batch correction, used as a comparison baseline.
//!
//! Points `x ∈ X` and `y ∈ Y` are paired when each is among the other's `k`
//! nearest neighbors in the other dataset. Every paired `y` gets the raw
//! correction `mean(x - y)` over its partners. The correction applied to each
//! `y` is a Gaussian-weighted average of the raw corrections of nearby paired
//! points in `Y`.
//!
//! This is a compact reimplementation for benchmarking. It performs no
//! cosine normalization, per-feature scaling or dimensionality reduction.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::neighbors::knn_indices;
use crate::scalar::{pairwise_sq_dists, Matrix, Real, Vector};

/// Which points carry weight in the smoothing average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// Average over paired points only, so unpaired points do not dilute
    /// the correction.
    #[default]
    PairedOnly,
    /// Row-normalized over all of `Y`, unpaired points contributing zero vectors.
    AllPoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MnnParams {
    pub k: usize,
    /// Smoothing width; `None` uses the median pairwise distance within `Y`.
    pub sigma: Option<f64>,
    pub smoothing: Smoothing,
}

impl Default for MnnParams {
    fn default() -> Self {
        Self {
            k: 20,
            sigma: None,
            smoothing: Smoothing::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MnnResult<T: Real> {
    pub corrected: Matrix<T>,
    /// Number of mutual pairs.
    pub pairs: usize,
    /// Smoothing width actually used.
    pub sigma: T,
    /// Mean Euclidean norm of the applied corrections.
    pub mean_correction_norm: T,
}

/// Median of the pairwise distances `i < j` between rows.
pub fn median_pairwise_distance<T: Real>(y: &Matrix<T>) -> T {
    let d2 = pairwise_sq_dists(y);
    let n = y.nrows();
    let mut all: Vec<T> = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for i in 0..j {
            all.push(d2[(i, j)]);
        }
    }
    let m = all.len();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = if m % 2 == 1 {
        all[m / 2]
    } else {
        (all[m / 2 - 1] + all[m / 2]) * T::lit(0.5)
    };
    med.sqrt()
}

/// Corrects `Y` towards `X`.
pub fn mnn_correct<T: Real>(x: &DataMatrix<T>, y: &DataMatrix<T>, p: &MnnParams) -> Result<MnnResult<T>> {
    let (xv, yv) = (x.values(), y.values());
    if xv.ncols() != yv.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} features",
            xv.ncols(),
            yv.ncols()
        )));
    }
    let (n1, n2) = (xv.nrows(), yv.nrows());
    if p.k == 0 || p.k >= n1.min(n2) {
        return Err(Error::InvalidParameter(format!(
            "MNN needs 1 <= k < min(N1, N2) = {}, got {}",
            n1.min(n2),
            p.k
        )));
    }
    let sigma = match p.sigma {
        Some(s) if s > 0.0 && s.is_finite() => T::lit(s),
        Some(s) => return Err(Error::InvalidParameter(format!("MNN sigma must be positive, got {s}"))),
        None => median_pairwise_distance(yv),
    };
    if sigma <= T::zero() {
        return Err(Error::InvalidData(
            "all points of Y coincide; pass an explicit sigma".into(),
        ));
    }

    let y_in_x = knn_indices(yv, xv, p.k, false)?;
    let x_in_y = knn_indices(xv, yv, p.k, false)?;
    let d = xv.ncols();
    let mut raw = Matrix::<T>::zeros(n2, d);
    let mut paired = vec![false; n2];
    let mut pairs = 0;
    for (j, cands) in y_in_x.iter().enumerate() {
        let partners: Vec<usize> = cands.iter().copied().filter(|&i| x_in_y[i].contains(&j)).collect();
        if partners.is_empty() {
            continue;
        }
        pairs += partners.len();
        paired[j] = true;
        let mut v = Vector::<T>::zeros(d);
        for &i in &partners {
            v += (xv.row(i) - yv.row(j)).transpose();
        }
        v /= T::from_usize_lossy(partners.len());
        raw.set_row(j, &v.transpose());
    }
    if pairs == 0 {
        log::warn!("no mutual nearest neighbor pairs at k={}; Y returned unchanged", p.k);
        return Ok(MnnResult {
            corrected: yv.clone(),
            pairs: 0,
            sigma,
            mean_correction_norm: T::zero(),
        });
    }

    let d2 = pairwise_sq_dists(yv);
    let rate = T::one() / (T::lit(2.0) * sigma * sigma);
    let mut corrected = yv.clone();
    let mut norm_sum = T::zero();
    for j in 0..n2 {
        let mut acc = Vector::<T>::zeros(d);
        let mut total = T::zero();
        for l in 0..n2 {
            let use_l = paired[l] || p.smoothing == Smoothing::AllPoints;
            if !use_l {
                continue;
            }
            let w = (-d2[(j, l)] * rate).exp();
            total += w;
            if paired[l] {
                acc += raw.row(l).transpose() * w;
            }
        }
        if total > T::zero() {
            acc /= total;
        }
        norm_sum += acc.norm();
        let mut row = corrected.row_mut(j);
        row += acc.transpose();
    }
    Ok(MnnResult {
        corrected,
        pairs,
        sigma,
        mean_correction_norm: norm_sum / T::from_usize_lossy(n2),
    })
}
