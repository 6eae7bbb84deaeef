//! Itersine windows and the joint bandlimiting weights built from them.
//!
//! Window `ξ` of an `ℓ`-band bank is
//! `w_ξ(λ) = sin(π/2 · cos²(π/2 · (ℓλ - ξ)))` for `|ℓλ - ξ| < 1`, and exactly
//! zero elsewhere. Adjacent windows satisfy `w_ξ² + w_{ξ+1}² = 1`, so the
//! bank `ξ = 0..=ℓ` is a squared partition of unity on `[0, 1]`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::scalar::{Matrix, Real, Vector};

/// Which windows enter the weight sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandSum {
    /// `ξ = 0..=ℓ`; gives weight 1 for equal eigenvalues everywhere in `[0, 1]`.
    #[default]
    AllWindows,
    /// `ξ = 1..=ℓ`; drops the window centered at 0.
    FromOne,
}

/// Value of window `xi` of an `bands`-band itersine bank at `lambda`.
pub fn itersine_window<T: Real>(lambda: T, xi: i64, bands: u32) -> T {
    let u = T::lit(bands as f64) * lambda - T::lit(xi as f64);
    if u.abs() >= T::one() {
        return T::zero();
    }
    let half_pi = T::lit(FRAC_PI_2);
    let c = (half_pi * u).cos();
    (half_pi * c * c).sin()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowBank {
    bands: u32,
    sum: BandSum,
}

impl WindowBank {
    pub fn new(bands: u32, sum: BandSum) -> crate::Result<Self> {
        if bands == 0 {
            return Err(crate::Error::InvalidParameter("band count must be at least 1".into()));
        }
        Ok(Self { bands, sum })
    }

    pub fn bands(&self) -> u32 {
        self.bands
    }

    fn first(&self) -> i64 {
        match self.sum {
            BandSum::AllWindows => 0,
            BandSum::FromOne => 1,
        }
    }

    /// Window responses at `lambda`, one entry per summed window.
    pub fn responses<T: Real>(&self, lambda: T) -> Vec<T> {
        (self.first()..=self.bands as i64)
            .map(|xi| itersine_window(lambda, xi, self.bands))
            .collect()
    }

    /// `w[i][j] = Σ_ξ w_ξ(λx[i]) w_ξ(λy[j])`.
    ///
    /// Each entry is accumulated in window order, so swapping the arguments
    /// gives the exact transpose. Pairs at least `2/ℓ` apart share no window
    /// and get an exact zero. Rounding above 1 is clipped.
    pub fn weights<T: Real>(&self, lx: &Vector<T>, ly: &Vector<T>) -> Matrix<T> {
        let rx: Vec<Vec<T>> = lx.iter().map(|&l| self.responses(l)).collect();
        let ry: Vec<Vec<T>> = ly.iter().map(|&l| self.responses(l)).collect();
        let reach = T::lit(2.0) / T::lit(self.bands as f64);
        Matrix::from_fn(lx.len(), ly.len(), |i, j| {
            if (lx[i] - ly[j]).abs() >= reach {
                return T::zero();
            }
            rx[i]
                .iter()
                .zip(&ry[j])
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
                .min(T::one())
        })
    }
}

/// Joint bandlimiting weights over the full window bank `ξ = 0..=ℓ`.
pub fn bandlimiting_weights<T: Real>(lx: &Vector<T>, ly: &Vector<T>, bands: u32) -> crate::Result<Matrix<T>> {
    Ok(WindowBank::new(bands, BandSum::AllWindows)?.weights(lx, ly))
}
