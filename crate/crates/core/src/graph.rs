//! Kernel graphs over a single dataset.
//!
//! Two constructions are provided:
//!
//! * [`gauss_kernel_graph`]: the symmetrized Gaussian
//!   `W(i,j) = ½[exp(-‖xᵢ-xⱼ‖²/(2ε(xᵢ))) + exp(-‖xᵢ-xⱼ‖²/(2ε(xⱼ)))]` with
//!   `ε(x) = σ(x)²`, where `σ` is either a constant or the distance from `x`
//!   to its k-th nearest neighbor. This is the default.
//! * [`anisotropic_kernel_graph`]: `K(xᵢ,xⱼ) = G(xᵢ,xⱼ) / (‖G(xᵢ,·)‖₁ ‖G(xⱼ,·)‖₁)`
//!   with `G = exp(-‖xᵢ-xⱼ‖²/σ)`.
//!
//! Both keep self loops and produce dense matrices.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sq_dists, Matrix, Real, Vector};

/// How the Gaussian kernel width is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    /// One width σ for every point.
    Fixed(f64),
    /// σ(x) is the distance from x to its k-th nearest neighbor.
    Adaptive(usize),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Adaptive(20)
    }
}

impl Bandwidth {
    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Bandwidth::Fixed(s) if !(s > 0.0 && s.is_finite()) => {
                Err(Error::InvalidParameter(format!("bandwidth must be positive, got {s}")))
            }
            Bandwidth::Adaptive(k) if k == 0 || k >= n => Err(Error::InvalidParameter(format!(
                "adaptive bandwidth needs 1 <= k < N, got k={k}, N={n}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Symmetrized (adaptive) Gaussian.
    #[default]
    Gaussian,
    /// Density-normalized Gaussian; requires a fixed bandwidth.
    Anisotropic,
}

/// Kernel construction parameters for one dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
    /// Interpolation between the plain and density-normalized kernels.
    /// Only `None` (or `1.0` with the anisotropic kernel) is accepted; other
    /// values are rejected as unsupported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anisotropy: Option<f64>,
}

impl KernelSpec {
    pub fn build<T: Real>(&self, x: &DataMatrix<T>) -> Result<KernelGraph<T>> {
        match (self.kind, self.anisotropy) {
            (_, None) | (KernelKind::Anisotropic, Some(1.0)) => {}
            (_, Some(q)) => {
                return Err(Error::Unsupported(format!(
                    "anisotropy q={q}: only the density-normalized kernel (q=1) is implemented"
                )))
            }
        }
        match self.kind {
            KernelKind::Gaussian => gauss_kernel_graph(x, self.bandwidth),
            KernelKind::Anisotropic => match self.bandwidth {
                Bandwidth::Fixed(s) => anisotropic_kernel_graph(x, T::lit(s)),
                Bandwidth::Adaptive(_) => Err(Error::InvalidParameter(
                    "the anisotropic kernel takes a fixed bandwidth".into(),
                )),
            },
        }
    }
}

/// Kernel matrix, degrees and normalized Laplacian of one dataset.
#[derive(Clone, Debug)]
pub struct KernelGraph<T: Real> {
    weights: Matrix<T>,
    degrees: Vector<T>,
    laplacian: Matrix<T>,
}

impl<T: Real> KernelGraph<T> {
    /// Builds degrees and `L = I - D^{-1/2} W D^{-1/2}` from a symmetric kernel.
    pub fn from_weights(weights: Matrix<T>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "kernel matrix is {}x{}",
                n,
                weights.ncols()
            )));
        }
        let degrees = Vector::from_iterator(n, weights.row_iter().map(|r| r.sum()));
        if let Some(i) = degrees.iter().position(|&d| !(d > T::zero() && d.is_finite())) {
            return Err(Error::ZeroDegree(i));
        }
        let inv_sqrt = degrees.map(|d| T::one() / d.sqrt());
        let mut laplacian = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let a = weights[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]);
                laplacian[(i, j)] = if i == j { T::one() - a } else { -a };
            }
        }
        Ok(Self {
            weights,
            degrees,
            laplacian,
        })
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn degrees(&self) -> &Vector<T> {
        &self.degrees
    }

    pub fn laplacian(&self) -> &Matrix<T> {
        &self.laplacian
    }

    pub fn n_points(&self) -> usize {
        self.weights.nrows()
    }

    /// `I - L = D^{-1/2} W D^{-1/2}`, the matrix whose eigenvectors form the
    /// graph Fourier basis.
    pub fn normalized_adjacency(&self) -> Matrix<T> {
        let n = self.n_points();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                T::one() - self.laplacian[(i, j)]
            } else {
                -self.laplacian[(i, j)]
            }
        })
    }
}

/// Distance from each point to its k-th nearest other point.
pub fn adaptive_bandwidth<T: Real>(x: &DataMatrix<T>, k: usize) -> Result<Vector<T>> {
    let n = x.n_points();
    Bandwidth::Adaptive(k).validate(n)?;
    let d2 = pairwise_sq_dists(x.values());
    bandwidth_from_sq_dists(&d2, k)
}

fn bandwidth_from_sq_dists<T: Real>(d2: &Matrix<T>, k: usize) -> Result<Vector<T>> {
    let n = d2.nrows();
    let mut out = Vector::zeros(n);
    let mut row: Vec<T> = Vec::with_capacity(n - 1);
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| d2[(i, j)]));
        let (_, kth, _) = row.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
        let s = kth.sqrt();
        if s <= T::zero() {
            return Err(Error::ZeroBandwidth { point: i, k });
        }
        out[i] = s;
    }
    Ok(out)
}

/// Symmetrized Gaussian kernel graph.
pub fn gauss_kernel_graph<T: Real>(x: &DataMatrix<T>, bw: Bandwidth) -> Result<KernelGraph<T>> {
    let n = x.n_points();
    bw.validate(n)?;
    let d2 = pairwise_sq_dists(x.values());
    let sigma = match bw {
        Bandwidth::Fixed(s) => Vector::from_element(n, T::lit(s)),
        Bandwidth::Adaptive(k) => bandwidth_from_sq_dists(&d2, k)?,
    };
    // 1 / (2 ε(x)) with ε = σ²
    let rate = sigma.map(|s| T::one() / (T::lit(2.0) * s * s));
    let half = T::lit(0.5);
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = T::one();
        for j in (i + 1)..n {
            let d = d2[(i, j)];
            let v = half * ((-d * rate[i]).exp() + (-d * rate[j]).exp());
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    KernelGraph::from_weights(w)
}

/// Density-normalized Gaussian kernel graph.
pub fn anisotropic_kernel_graph<T: Real>(x: &DataMatrix<T>, sigma: T) -> Result<KernelGraph<T>> {
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    let n = x.n_points();
    let d2 = pairwise_sq_dists(x.values());
    let g = d2.map(|d| (-d / sigma).exp());
    let row_sums: Vec<T> = g.row_iter().map(|r| r.sum()).collect();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = g[(i, j)] / (row_sums[i] * row_sums[j]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    KernelGraph::from_weights(w)
}

/// Row-stochastic diffusion operator `P = D⁻¹ W`.
pub fn diffusion_operator<T: Real>(g: &KernelGraph<T>) -> Result<Matrix<T>> {
    let d = g.degrees();
    if let Some(i) = d
        .iter()
        .position(|&v| v.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::ZeroDegree(i));
    }
    let n = g.n_points();
    Ok(Matrix::from_fn(n, n, |i, j| g.weights()[(i, j)] / d[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::max_abs;

    fn line(points: &[f64]) -> DataMatrix<f64> {
        DataMatrix::from_values(Matrix::from_column_slice(points.len(), 1, points)).unwrap()
    }

    fn blob(n: usize, d: usize, seed: u64) -> DataMatrix<f64> {
        let mut r = crate::rng::Rng::new(seed);
        DataMatrix::from_values(r.normal_matrix(n, d)).unwrap()
    }

    #[test]
    fn adaptive_bandwidth_on_a_line() {
        let x = line(&[0.0, 1.0, 3.0]);
        assert_eq!(adaptive_bandwidth(&x, 1).unwrap().as_slice(), &[1.0, 1.0, 2.0]);
        assert_eq!(adaptive_bandwidth(&x, 2).unwrap().as_slice(), &[3.0, 2.0, 3.0]);
        assert!(adaptive_bandwidth(&x, 3).is_err());
        assert!(adaptive_bandwidth(&x, 0).is_err());
    }

    #[test]
    fn duplicate_points_give_zero_bandwidth_error() {
        let x = line(&[0.0, 0.0, 3.0]);
        let err = adaptive_bandwidth(&x, 1).unwrap_err();
        assert!(matches!(err, Error::ZeroBandwidth { point: 0, k: 1 }));
        assert!(err.to_string().contains("fixed bandwidth"));
        // second neighbor is non-degenerate
        assert!(adaptive_bandwidth(&x, 2).is_ok());
    }

    #[test]
    fn fixed_bandwidth_closed_form() {
        // squared distance 2ε with ε = σ² gives exp(-1)
        let sigma: f64 = 0.7;
        let x = line(&[0.0, (2.0 * sigma * sigma).sqrt()]);
        let g = gauss_kernel_graph(&x, Bandwidth::Fixed(sigma)).unwrap();
        assert!((g.weights()[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.weights()[(0, 0)], 1.0);
        assert!(gauss_kernel_graph(&x, Bandwidth::Fixed(0.0)).is_err());
        assert!(gauss_kernel_graph(&x, Bandwidth::Fixed(-1.0)).is_err());
    }

    #[test]
    fn two_point_limit_laplacian() {
        // W = [[1,1],[1,1]]: hand eigendecomposition of L gives {0, 1}
        let g = KernelGraph::from_weights(Matrix::from_element(2, 2, 1.0f64)).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!(max_abs(&(g.laplacian() - expected)) < 1e-15);
        let mut ev: Vec<f64> = g.laplacian().clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let p = diffusion_operator(&g).unwrap();
        assert!(max_abs(&(p - Matrix::from_element(2, 2, 0.5))) < 1e-15);
    }

    #[test]
    fn graph_invariants_hold() {
        let x = blob(40, 3, 1);
        let g = gauss_kernel_graph(&x, Bandwidth::Adaptive(5)).unwrap();
        let w = g.weights();
        assert_eq!(w, &w.transpose());
        assert!(w.diagonal().iter().all(|&v| v == 1.0));
        for i in 0..40 {
            let s: f64 = w.row(i).sum();
            assert!((g.degrees()[i] - s).abs() <= 1e-10 * s);
        }
        let d_half = g.degrees().map(|d| 1.0 / d.sqrt());
        let expect = Matrix::identity(40, 40) - Matrix::from_diagonal(&d_half) * w * Matrix::from_diagonal(&d_half);
        assert!(max_abs(&(g.laplacian() - expect)) <= 1e-12);
        let ev = g.laplacian().clone().symmetric_eigenvalues();
        assert!(ev.iter().all(|&l| (-1e-10..=2.0 + 1e-10).contains(&l)));
        let p = diffusion_operator(&g).unwrap();
        for i in 0..40 {
            assert!((p.row(i).sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn anisotropic_kernel_matches_direct_evaluation() {
        // 3 points {0,1,2}, σ = 1: scalar evaluation of the density-normalized kernel
        let x = line(&[0.0, 1.0, 2.0]);
        let g = anisotropic_kernel_graph(&x, 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        let e4 = (-4.0f64).exp();
        let r = [1.0 + e1 + e4, 1.0 + 2.0 * e1, 1.0 + e1 + e4];
        let gk = [[1.0, e1, e4], [e1, 1.0, e1], [e4, e1, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                let want = gk[i][j] / (r[i] * r[j]);
                assert!((g.weights()[(i, j)] - want).abs() < 1e-15);
            }
        }
        assert!(anisotropic_kernel_graph(&x, 0.0).is_err());
    }

    #[test]
    fn anisotropic_equidistant_points_give_constant_kernel() {
        // vertices of a regular simplex: all pairwise distances equal
        let x = DataMatrix::from_values(Matrix::<f64>::identity(4, 4)).unwrap();
        let g = anisotropic_kernel_graph(&x, 1.5).unwrap();
        let off = g.weights()[(0, 1)];
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((g.weights()[(i, j)] - off).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_of_normalized_adjacency_match_diffusion_operator() {
        let x = blob(15, 2, 9);
        let g = gauss_kernel_graph(&x, Bandwidth::Adaptive(4)).unwrap();
        let mut a: Vec<f64> = g
            .normalized_adjacency()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        let p = diffusion_operator(&g).unwrap();
        let mut b: Vec<f64> = p
            .complex_eigenvalues()
            .iter()
            .map(|c| {
                assert!(c.im.abs() < 1e-8);
                c.re
            })
            .collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
        assert!((b[14] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn permutation_equivariance_is_exact() {
        let x = blob(12, 3, 4);
        let perm = [3, 0, 11, 5, 1, 2, 10, 4, 9, 6, 8, 7];
        let xp = x.select_rows(&perm).unwrap();
        let g = gauss_kernel_graph(&x, Bandwidth::Adaptive(3)).unwrap();
        let gp = gauss_kernel_graph(&xp, Bandwidth::Adaptive(3)).unwrap();
        for (a, &i) in perm.iter().enumerate() {
            for (b, &j) in perm.iter().enumerate() {
                assert_eq!(gp.weights()[(a, b)], g.weights()[(i, j)]);
            }
        }
    }

    #[test]
    fn unsupported_anisotropy_knob() {
        let x = blob(10, 2, 2);
        let spec = KernelSpec {
            anisotropy: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(spec.build(&x).unwrap_err(), Error::Unsupported(_)));
        let eq1 = KernelSpec {
            kind: KernelKind::Anisotropic,
            bandwidth: Bandwidth::Fixed(1.0),
            anisotropy: Some(1.0),
        };
        assert!(eq1.build(&x).is_ok());
        let eq1_adaptive = KernelSpec {
            kind: KernelKind::Anisotropic,
            ..Default::default()
        };
        assert!(eq1_adaptive.build(&x).is_err());
    }

    #[test]
    fn f32_graph_builds() {
        let x: DataMatrix<f32> = blob(10, 2, 5).cast();
        let g = gauss_kernel_graph(&x, Bandwidth::Adaptive(3)).unwrap();
        assert_eq!(g.weights(), &g.weights().transpose());
    }
}
