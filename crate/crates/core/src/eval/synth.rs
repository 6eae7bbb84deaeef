use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::{Matrix, Real, Vector};

/// Gaussian class clusters around random unit-norm means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub classes: usize,
    pub d: usize,
    /// Per-coordinate standard deviation within a class.
    pub spread: f64,
    /// Norm of a random offset shared by all points. Nonzero offsets mimic
    /// data with a large common mean, such as pixel intensities.
    pub offset: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: 10,
            d: 100,
            spread: 0.03,
            offset: 3.0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.d < self.classes {
            return Err(Error::InvalidParameter(format!(
                "synthetic data needs 2 <= classes <= d, got classes={}, d={}",
                self.classes, self.d
            )));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite() && self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(Error::InvalidParameter(
                "spread and offset must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Class means and shared offset; several datasets drawn from one model
/// share their class structure.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthModel {
    pub spec: SynthSpec,
    pub means: Matrix<f64>,
    pub offset: Vector<f64>,
}

impl SynthModel {
    pub fn draw(spec: SynthSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        const ATTEMPTS: usize = 100;
        for _ in 0..ATTEMPTS {
            let mut means: Matrix<f64> = rng.normal_matrix(spec.classes, spec.d);
            for mut row in means.row_iter_mut() {
                let n = row.norm();
                row /= n;
            }
            let separated = (0..spec.classes)
                .all(|a| ((a + 1)..spec.classes).all(|b| (means.row(a) - means.row(b)).norm() >= 2.0 * spec.spread));
            if !separated {
                continue;
            }
            let offset = if spec.offset > 0.0 {
                let v: Vector<f64> = Vector::from_fn(spec.d, |_, _| rng.normal());
                &v * (spec.offset / v.norm())
            } else {
                Vector::zeros(spec.d)
            };
            return Ok(Self { spec, means, offset });
        }
        Err(Error::InvalidParameter(format!(
            "could not draw class means separated by 2*spread={} in {ATTEMPTS} attempts",
            2.0 * spec.spread
        )))
    }

    /// `n` labeled points, classes as balanced as possible, class-major order.
    pub fn sample<T: Real>(&self, n: usize, rng: &mut Rng) -> Result<DataMatrix<T>> {
        let c = self.spec.classes;
        let mut values = Matrix::<T>::zeros(n, self.spec.d);
        let mut labels = Vec::with_capacity(n);
        let mut row = 0;
        for class in 0..c {
            let count = n / c + usize::from(class < n % c);
            for _ in 0..count {
                for j in 0..self.spec.d {
                    let v = self.offset[j] + self.means[(class, j)] + self.spec.spread * rng.normal();
                    values[(row, j)] = T::lit(v);
                }
                labels.push(class);
                row += 1;
            }
        }
        DataMatrix::new(values, Some(labels), "synthetic")
    }
}

/// `classes` Gaussian clusters of `per_class` points in `d` dimensions with
/// unit-norm random means and covariance `spread²·I`.
pub fn synth_dataset<T: Real>(
    classes: usize,
    per_class: usize,
    d: usize,
    spread: f64,
    rng: &mut Rng,
) -> Result<DataMatrix<T>> {
    let spec = SynthSpec {
        classes,
        d,
        spread,
        offset: 0.0,
    };
    SynthModel::draw(spec, rng)?.sample(classes * per_class, rng)
}

/// Smooth low-dimensional manifold embedded in `d` features through random
/// Fourier features, plus a shared offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManifoldSpec {
    pub latent_dim: usize,
    pub d: usize,
    /// Standard deviation of the random frequencies.
    pub frequency: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl Default for ManifoldSpec {
    fn default() -> Self {
        Self {
            latent_dim: 2,
            d: 100,
            frequency: 2.0,
            amplitude: 3.0,
            offset: 3.0,
        }
    }
}

/// `n` points `amplitude/√d · cos(zW + b) + offset·g/√d` with latent `z`
/// uniform on the unit cube, `W` Gaussian with the given frequency scale,
/// `b` uniform phases and `g` one standard Gaussian vector.
pub fn manifold_sample<T: Real>(n: usize, spec: &ManifoldSpec, rng: &mut Rng) -> Result<DataMatrix<T>> {
    if spec.latent_dim == 0 || spec.d == 0 {
        return Err(Error::InvalidParameter(
            "latent and ambient dimensions must be positive".into(),
        ));
    }
    let z = Matrix::<f64>::from_fn(n, spec.latent_dim, |_, _| rng.uniform());
    let w = rng.normal_matrix::<f64>(spec.latent_dim, spec.d) * spec.frequency;
    let b: Vec<f64> = (0..spec.d).map(|_| rng.uniform() * 2.0 * PI).collect();
    let scale = 1.0 / (spec.d as f64).sqrt();
    let g: Vec<f64> = (0..spec.d).map(|_| rng.normal() * spec.offset * scale).collect();
    let zw = z * w;
    let values = Matrix::<T>::from_fn(n, spec.d, |i, j| {
        T::lit(spec.amplitude * scale * (zw[(i, j)] + b[j]).cos() + g[j])
    });
    DataMatrix::new(values, None, "manifold")
}
