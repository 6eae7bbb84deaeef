//! Harmonic alignment of two or more datasets.
//!
//! Each dataset gets its own kernel graph, Fourier basis (trivial pair
//! removed) and diffusion coordinates `Φ₀`. Features are transformed into
//! each basis (`X̂ = ΨᵀX`), correlated across datasets under the
//! bandlimiting weights (`C = w ∘ X̂Ŷᵀ`), and `C` is replaced by its nearest
//! orthogonal map `T = UVᵀ`. The aligned embedding stacks every dataset's
//! coordinates expressed in every other dataset's harmonics:
//!
//! ```text
//! [ Φ₀ˣ    Φ₀ˣT ] [ Λxᵗ    0  ]
//! [ Φ₀ʸTᵀ  Φ₀ʸ  ] [  0    Λyᵗ ]
//! ```
//!
//! Pairwise alignment is the two-dataset case of [`multi_alignment`] and
//! runs through the same code.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::filters::{BandSum, WindowBank};
use crate::graph::KernelSpec;
use crate::scalar::{Matrix, Real, Vector};
use crate::spectral::{
    diffusion_coordinates_with, drop_trivial, fourier_basis, int_pow, FourierBasis, Phi0, Rank, SpectralDiagnostics,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentParams {
    /// Band count `ℓ` of the window bank.
    pub bands: u32,
    /// Diffusion time.
    pub t: u32,
    pub kernel: KernelSpec,
    pub rank: Rank,
    pub phi0: Phi0,
    pub band_sum: BandSum,
    /// Center and scale feature columns to unit variance before the GFT.
    pub standardize: bool,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        Self {
            bands: 8,
            t: 1,
            kernel: KernelSpec::default(),
            rank: Rank::Auto,
            phi0: Phi0::default(),
            band_sum: BandSum::default(),
            standardize: false,
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 {
            return Err(Error::InvalidParameter("band count must be at least 1".into()));
        }
        Ok(())
    }

    fn bank(&self) -> Result<WindowBank> {
        WindowBank::new(self.bands, self.band_sum)
    }
}

/// Per-dataset products of the alignment pipeline.
#[derive(Clone, Debug)]
pub struct Harmonics<T: Real> {
    /// Basis with the trivial pair removed.
    pub basis: FourierBasis<T>,
    /// Diffusion coordinates at time zero.
    pub phi0: Matrix<T>,
    /// `ΨᵀX`.
    pub coefficients: Matrix<T>,
}

impl<T: Real> Harmonics<T> {
    pub fn values(&self) -> &Vector<T> {
        self.basis.values()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }
}

/// Graph, basis, diffusion coordinates and feature transform of one dataset.
pub fn harmonics<T: Real>(x: &DataMatrix<T>, p: &AlignmentParams) -> Result<Harmonics<T>> {
    p.validate()?;
    let g = p.kernel.build(x)?;
    let basis = drop_trivial(&fourier_basis(&g, p.rank.resolve(x.n_points()))?)?;
    let phi0 = diffusion_coordinates_with(&basis, 0, p.phi0).phi;
    let coefficients = if p.standardize {
        gft_features(basis.vectors(), &standardize_columns(x.values()))?
    } else {
        gft_features(basis.vectors(), x.values())?
    };
    Ok(Harmonics {
        basis,
        phi0,
        coefficients,
    })
}

/// Columns centered and scaled to unit variance; constant columns are only centered.
pub fn standardize_columns<T: Real>(x: &Matrix<T>) -> Matrix<T> {
    let n = T::from_usize_lossy(x.nrows());
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        if sd > T::zero() {
            col /= sd;
        }
    }
    out
}

/// Graph Fourier transform of every feature: `ΨᵀX`.
pub fn gft_features<T: Real>(psi: &Matrix<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    if psi.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, data has {}",
            psi.nrows(),
            x.nrows()
        )));
    }
    Ok(psi.tr_mul(x))
}

/// `C = w ∘ (X̂Ŷᵀ)`.
pub fn bandlimited_correlation<T: Real>(xh: &Matrix<T>, yh: &Matrix<T>, w: &Matrix<T>) -> Result<Matrix<T>> {
    if xh.ncols() != yh.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient matrices have {} and {} features",
            xh.ncols(),
            yh.ncols()
        )));
    }
    if w.shape() != (xh.nrows(), yh.nrows()) {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{}, expected {}x{}",
            w.nrows(),
            w.ncols(),
            xh.nrows(),
            yh.nrows()
        )));
    }
    Ok((xh * yh.transpose()).component_mul(w))
}

/// Nearest orthogonal map `UVᵀ` from a thin SVD `C = UΣVᵀ`.
pub fn orthogonalize<T: Real>(c: &Matrix<T>) -> Result<Matrix<T>> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("correlation matrix has non-finite entries".into()));
    }
    let (r1, r2) = c.shape();
    let svd = c
        .clone()
        .try_svd(true, true, T::machine_eps(), 0)
        .ok_or_else(|| Error::NoConvergence {
            solver: "svd",
            detail: format!("no convergence on a {r1}x{r2} correlation matrix"),
        })?;
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    Ok(u * vt)
}

/// Deviation of `T` from having orthonormal columns (tall) or rows (wide).
pub fn orthogonality_error<T: Real>(t: &Matrix<T>) -> T {
    let g = if t.nrows() >= t.ncols() {
        t.tr_mul(t)
    } else {
        t * t.transpose()
    };
    let n = g.nrows();
    (g - Matrix::identity(n, n)).amax()
}

/// Columns of `m` scaled by `values[j]^t`.
fn scale_columns<T: Real>(mut m: Matrix<T>, values: &Vector<T>, t: u32) -> Matrix<T> {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= int_pow(values[j], t);
    }
    m
}

fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<Range<usize>> {
    let mut start = 0;
    sizes
        .map(|s| {
            let r = start..start + s;
            start += s;
            r
        })
        .collect()
}

/// Block matrix with block `(i, j) = Φ₀⁽ⁱ⁾ T^{i→j} Λⱼᵗ` and block
/// `(i, i) = Φ₀⁽ⁱ⁾ Λᵢᵗ`. `maps[i][j]` holds `T^{i→j}` for `i ≠ j`.
fn assemble<T: Real>(
    phi0: &[&Matrix<T>],
    values: &[&Vector<T>],
    maps: &[Vec<Option<Matrix<T>>>],
    t: u32,
) -> Result<Matrix<T>> {
    let rows = offsets(phi0.iter().map(|p| p.nrows()));
    let cols = offsets(phi0.iter().map(|p| p.ncols()));
    let total_rows = rows.last().map_or(0, |r| r.end);
    let total_cols = cols.last().map_or(0, |r| r.end);
    let mut out = Matrix::zeros(total_rows, total_cols);
    for i in 0..phi0.len() {
        for j in 0..phi0.len() {
            let block = if i == j {
                scale_columns(phi0[i].clone(), values[j], t)
            } else {
                let map = maps[i][j].as_ref().expect("every off-diagonal map present");
                if map.shape() != (phi0[i].ncols(), phi0[j].ncols()) {
                    return Err(Error::DimensionMismatch(format!(
                        "map {i}->{j} is {}x{}, expected {}x{}",
                        map.nrows(),
                        map.ncols(),
                        phi0[i].ncols(),
                        phi0[j].ncols()
                    )));
                }
                scale_columns(phi0[i] * map, values[j], t)
            };
            out.view_mut((rows[i].start, cols[j].start), block.shape())
                .copy_from(&block);
        }
    }
    Ok(out)
}

/// The two-dataset aligned embedding for a given map `T`.
pub fn unified_diffusion_map<T: Real>(
    phi_x0: &Matrix<T>,
    phi_y0: &Matrix<T>,
    lx: &Vector<T>,
    ly: &Vector<T>,
    t_map: &Matrix<T>,
    t: u32,
) -> Result<Matrix<T>> {
    if lx.len() != phi_x0.ncols() || ly.len() != phi_y0.ncols() {
        return Err(Error::DimensionMismatch(
            "eigenvalue count differs from coordinate count".into(),
        ));
    }
    let maps = vec![vec![None, Some(t_map.clone())], vec![Some(t_map.transpose()), None]];
    assemble(&[phi_x0, phi_y0], &[lx, ly], &maps, t)
}

/// Correlation and orthogonal map from dataset `a` to dataset `b`.
fn pair_map<T: Real>(a: &Harmonics<T>, b: &Harmonics<T>, bank: &WindowBank) -> Result<(Matrix<T>, Matrix<T>)> {
    let w = bank.weights(a.values(), b.values());
    let c = bandlimited_correlation(&a.coefficients, &b.coefficients, &w)?;
    let t = orthogonalize(&c)?;
    Ok((c, t))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetDiagnostics {
    pub n_points: usize,
    /// Retained (clamped) eigenvalues after dropping the trivial one.
    pub spectrum: Vec<f64>,
    pub spectral: SpectralDiagnostics,
}

impl DatasetDiagnostics {
    fn of<T: Real>(h: &Harmonics<T>) -> Self {
        Self {
            n_points: h.phi0.nrows(),
            spectrum: h.values().iter().map(|v| v.as_f64()).collect(),
            spectral: h.basis.diagnostics().clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlignmentResult<T: Real> {
    /// Bandlimited correlation, `r₁ × r₂`.
    pub correlation: Matrix<T>,
    /// Orthogonal map from X's harmonics to Y's.
    pub map: Matrix<T>,
    /// Aligned embedding, X rows first.
    pub embedding: Matrix<T>,
    pub x_rows: Range<usize>,
    pub y_rows: Range<usize>,
    pub x: DatasetDiagnostics,
    pub y: DatasetDiagnostics,
    pub orthogonality_error: f64,
}

impl<T: Real> AlignmentResult<T> {
    pub fn x_embedding(&self) -> Matrix<T> {
        self.embedding.rows_range(self.x_rows.clone()).into_owned()
    }

    pub fn y_embedding(&self) -> Matrix<T> {
        self.embedding.rows_range(self.y_rows.clone()).into_owned()
    }
}

#[derive(Clone, Debug)]
pub struct MultiAlignmentResult<T: Real> {
    /// `maps[i][j] = T^{i→j}`; `None` on the diagonal.
    pub maps: Vec<Vec<Option<Matrix<T>>>>,
    /// Bandlimited correlations for `i < j`, same indexing as `maps`.
    pub correlations: Vec<Vec<Option<Matrix<T>>>>,
    pub embedding: Matrix<T>,
    pub rows: Vec<Range<usize>>,
    pub cols: Vec<Range<usize>>,
    pub datasets: Vec<DatasetDiagnostics>,
    /// Largest orthogonality error over all maps.
    pub orthogonality_error: f64,
}

impl<T: Real> MultiAlignmentResult<T> {
    pub fn map(&self, from: usize, to: usize) -> Option<&Matrix<T>> {
        self.maps.get(from)?.get(to)?.as_ref()
    }

    /// Rows of the embedding belonging to dataset `i`.
    pub fn dataset_embedding(&self, i: usize) -> Matrix<T> {
        self.embedding.rows_range(self.rows[i].clone()).into_owned()
    }
}

fn check_features<T: Real>(datasets: &[&DataMatrix<T>]) -> Result<()> {
    let d = datasets[0].n_features();
    for (i, x) in datasets.iter().enumerate().skip(1) {
        if x.n_features() != d {
            return Err(Error::DimensionMismatch(format!(
                "dataset {i} has {} features, dataset 0 has {d}; alignment needs a shared feature space",
                x.n_features()
            )));
        }
    }
    Ok(())
}

/// Aligns precomputed per-dataset harmonics.
pub fn align_harmonics<T: Real>(h: &[Harmonics<T>], p: &AlignmentParams) -> Result<MultiAlignmentResult<T>> {
    if h.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 datasets, got {}",
            h.len()
        )));
    }
    let bank = p.bank()?;
    let n = h.len();
    let mut maps: Vec<Vec<Option<Matrix<T>>>> = vec![vec![None; n]; n];
    let mut correlations: Vec<Vec<Option<Matrix<T>>>> = vec![vec![None; n]; n];
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let (c, t) = pair_map(&h[i], &h[j], &bank)?;
            worst = worst.max(orthogonality_error(&t).as_f64());
            maps[j][i] = Some(t.transpose());
            maps[i][j] = Some(t);
            correlations[i][j] = Some(c);
        }
    }
    let phi0: Vec<&Matrix<T>> = h.iter().map(|x| &x.phi0).collect();
    let values: Vec<&Vector<T>> = h.iter().map(|x| x.values()).collect();
    let embedding = assemble(&phi0, &values, &maps, p.t)?;
    Ok(MultiAlignmentResult {
        rows: offsets(h.iter().map(|x| x.phi0.nrows())),
        cols: offsets(h.iter().map(|x| x.phi0.ncols())),
        maps,
        correlations,
        embedding,
        datasets: h.iter().map(DatasetDiagnostics::of).collect(),
        orthogonality_error: worst,
    })
}

/// Joint embedding of `n ≥ 2` datasets sharing a feature space.
pub fn multi_alignment<T: Real>(datasets: &[&DataMatrix<T>], p: &AlignmentParams) -> Result<MultiAlignmentResult<T>> {
    if datasets.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 datasets, got {}",
            datasets.len()
        )));
    }
    p.validate()?;
    check_features(datasets)?;
    let h = datasets.iter().map(|x| harmonics(x, p)).collect::<Result<Vec<_>>>()?;
    align_harmonics(&h, p)
}

/// Aligns precomputed harmonics of two datasets.
pub fn align_pair<T: Real>(hx: &Harmonics<T>, hy: &Harmonics<T>, p: &AlignmentParams) -> Result<AlignmentResult<T>> {
    let mut m = align_harmonics(&[hx.clone(), hy.clone()], p)?;
    let map = m.maps[0][1].take().expect("pair map");
    let correlation = m.correlations[0][1].take().expect("pair correlation");
    let y = m.datasets.pop().expect("two datasets");
    let x = m.datasets.pop().expect("two datasets");
    Ok(AlignmentResult {
        correlation,
        map,
        embedding: m.embedding,
        x_rows: m.rows[0].clone(),
        y_rows: m.rows[1].clone(),
        x,
        y,
        orthogonality_error: m.orthogonality_error,
    })
}

/// Aligned embedding of two datasets sharing a feature space.
pub fn harmonic_alignment<T: Real>(
    x: &DataMatrix<T>,
    y: &DataMatrix<T>,
    p: &AlignmentParams,
) -> Result<AlignmentResult<T>> {
    p.validate()?;
    check_features(&[x, y])?;
    let hx = harmonics(x, p)?;
    let hy = harmonics(y, p)?;
    align_pair(&hx, &hy, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Bandwidth;
    use crate::rng::Rng;
    use crate::scalar::max_abs;

    fn data(n: usize, d: usize, seed: u64) -> DataMatrix<f64> {
        DataMatrix::from_values(Rng::new(seed).normal_matrix(n, d)).unwrap()
    }

    fn params() -> AlignmentParams {
        AlignmentParams {
            kernel: KernelSpec {
                bandwidth: Bandwidth::Adaptive(5),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn gft_of_the_basis_is_identity() {
        let x = data(30, 2, 1);
        let h = harmonics(&x, &params()).unwrap();
        let psi = h.basis.vectors();
        let r = psi.ncols();
        assert!(max_abs(&(gft_features(psi, psi).unwrap() - Matrix::identity(r, r))) < 1e-10);
        assert_eq!(gft_features(psi, &Matrix::zeros(30, 4)).unwrap(), Matrix::zeros(r, 4));
        assert!(gft_features(psi, &Matrix::zeros(29, 4)).is_err());
    }

    #[test]
    fn correlation_hand_example() {
        let xh = Matrix::<f64>::identity(2, 2);
        let yh = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let w = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let c = bandlimited_correlation(&xh, &yh, &w).unwrap();
        assert_eq!(c, Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert!(bandlimited_correlation(&xh, &Matrix::zeros(2, 3), &w).is_err());
        assert!(bandlimited_correlation(&xh, &yh, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn orthogonalize_examples() {
        assert!(max_abs(&(orthogonalize(&Matrix::<f64>::identity(3, 3)).unwrap() - Matrix::identity(3, 3))) < 1e-14);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![3.0f64, 2.0]));
        assert!(max_abs(&(orthogonalize(&d).unwrap() - Matrix::identity(2, 2))) < 1e-14);
        let wide = Rng::new(3).normal_matrix::<f64>(4, 7);
        let t = orthogonalize(&wide).unwrap();
        assert_eq!(t.shape(), (4, 7));
        assert!(orthogonality_error(&t) < 1e-12);
        let mut bad = Matrix::<f64>::identity(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert!(orthogonalize(&bad).is_err());
    }

    #[test]
    fn unified_map_block_structure() {
        let phi = Rng::new(4).normal_matrix::<f64>(5, 3);
        let l = Vector::from_vec(vec![0.9, 0.5, 0.0]);
        let eye = Matrix::identity(3, 3);
        let u = unified_diffusion_map(&phi, &phi, &l, &l, &eye, 1).unwrap();
        assert_eq!(u.rows(0, 5), u.rows(5, 5));
        assert!(u.column(2).iter().all(|&v| v == 0.0));
        let u0 = unified_diffusion_map(&phi, &phi, &l, &l, &eye, 0).unwrap();
        assert_eq!(u0.view((0, 0), (5, 3)), phi.view((0, 0), (5, 3)));
        assert!(unified_diffusion_map(&phi, &phi, &l, &l, &Matrix::identity(2, 2), 1).is_err());
    }

    #[test]
    fn unequal_feature_counts_are_rejected() {
        let err = harmonic_alignment(&data(20, 3, 1), &data(20, 4, 2), &params()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        assert!(multi_alignment(&[&data(20, 3, 1)], &params()).is_err());
        let p = AlignmentParams { bands: 0, ..params() };
        assert!(harmonic_alignment(&data(20, 3, 1), &data(20, 3, 2), &p).is_err());
    }

    #[test]
    fn pairwise_equals_two_dataset_multi_bitwise() {
        let x = data(40, 6, 1);
        let y = data(30, 6, 2);
        let a = harmonic_alignment(&x, &y, &params()).unwrap();
        let m = multi_alignment(&[&x, &y], &params()).unwrap();
        assert_eq!(a.embedding, m.embedding);
        assert_eq!(&a.map, m.map(0, 1).unwrap());
        assert_eq!(a.x_rows, 0..40);
        assert_eq!(a.y_rows, 40..70);
        assert_eq!(a.embedding.ncols(), 39 + 29);
    }

    #[test]
    fn standardize_only_changes_coefficients() {
        let x = data(25, 3, 8)
            .map_values(Rng::new(8).normal_matrix::<f64>(25, 3) * 50.0)
            .unwrap();
        let s = standardize_columns(x.values());
        for col in s.column_iter() {
            assert!(col.mean().abs() < 1e-12);
            assert!((col.norm_squared() / 25.0 - 1.0).abs() < 1e-12);
        }
        let p = AlignmentParams {
            standardize: true,
            ..params()
        };
        let a = harmonics(&x, &p).unwrap();
        let b = harmonics(&x, &params()).unwrap();
        assert_eq!(a.phi0, b.phi0);
        assert_ne!(a.coefficients, b.coefficients);
    }
}
