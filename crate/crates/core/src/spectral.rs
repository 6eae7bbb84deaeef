//! Graph Fourier basis and diffusion coordinates.
//!
//! The basis is the eigendecomposition of `A = I - L = D^{-1/2} W D^{-1/2}`,
//! ordered by descending eigenvalue. `A` shares its spectrum with the
//! diffusion operator `P = D⁻¹W`, and `D^{-1/2}ψ` is a right eigenvector of
//! `P` for every eigenvector `ψ` of `A`.

mod krylov;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::KernelGraph;
use crate::scalar::{Matrix, Real, Vector};

pub use krylov::{top_eigenpairs, KrylovOptions, KrylovOutput};

/// Eigenvalues closer than this are reported as near-ties.
pub const TIE_GAP: f64 = 1e-10;

/// How many eigenpairs to compute.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank {
    /// Full decomposition up to `AUTO_FULL_LIMIT` points, `AUTO_RANK` above.
    #[default]
    Auto,
    Full,
    Top(usize),
}

impl Rank {
    pub const AUTO_FULL_LIMIT: usize = 2000;
    pub const AUTO_RANK: usize = 100;

    /// Requested number of eigenpairs for an `n`-point graph; `None` means all.
    pub fn resolve(self, n: usize) -> Option<usize> {
        match self {
            Rank::Auto if n <= Self::AUTO_FULL_LIMIT => None,
            Rank::Auto => Some(Self::AUTO_RANK.min(n)),
            Rank::Full => None,
            Rank::Top(r) => Some(r),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    /// `"dense"` or `"krylov"`.
    pub solver: String,
    pub matvecs: usize,
    pub restarts: usize,
    /// Largest eigenpair residual `‖Aψ - λψ‖₂`; only measured by the iterative solver.
    pub max_residual: Option<f64>,
    /// Number of eigenvalues moved by clamping into `[0, 1]`.
    pub clamped: usize,
    /// Index pairs `(j, j+1)` of adjacent eigenvalues closer than [`TIE_GAP`].
    pub near_ties: Vec<(usize, usize)>,
}

/// Orthonormal eigenvectors of `I - L` with descending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierBasis<T: Real> {
    vectors: Matrix<T>,
    values: Vector<T>,
    raw_values: Vector<T>,
    degrees: Vector<T>,
    diagnostics: SpectralDiagnostics,
}

impl<T: Real> FourierBasis<T> {
    /// Assembles a basis from precomputed parts. Eigenvalues must already be
    /// sorted descending; they are clamped here and the sign convention is
    /// applied to `vectors`.
    pub fn from_parts(vectors: Matrix<T>, values: Vector<T>, degrees: Vector<T>) -> Result<Self> {
        Self::finish(vectors, values, degrees, SpectralDiagnostics::default())
    }

    fn finish(
        mut vectors: Matrix<T>,
        raw_values: Vector<T>,
        degrees: Vector<T>,
        mut diagnostics: SpectralDiagnostics,
    ) -> Result<Self> {
        let (n, r) = vectors.shape();
        if raw_values.len() != r || degrees.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "basis {n}x{r} with {} eigenvalues and {} degrees",
                raw_values.len(),
                degrees.len()
            )));
        }
        if raw_values.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("eigenvalues must be sorted descending".into()));
        }
        apply_sign_convention(&mut vectors);
        let values = raw_values.map(|v| v.max(T::zero()).min(T::one()));
        diagnostics.clamped = values.iter().zip(raw_values.iter()).filter(|(a, b)| a != b).count();
        diagnostics.near_ties = (1..r)
            .filter(|&j| (raw_values[j - 1] - raw_values[j]).as_f64() < TIE_GAP)
            .map(|j| (j - 1, j))
            .collect();
        if !diagnostics.near_ties.is_empty() {
            log::debug!(
                "{} near-degenerate eigenvalue gaps; the basis is not unique there",
                diagnostics.near_ties.len()
            );
        }
        Ok(Self {
            vectors,
            values,
            raw_values,
            degrees,
            diagnostics,
        })
    }

    /// `Ψ`, one eigenvector per column.
    pub fn vectors(&self) -> &Matrix<T> {
        &self.vectors
    }

    /// Eigenvalues clamped into `[0, 1]`.
    pub fn values(&self) -> &Vector<T> {
        &self.values
    }

    /// Eigenvalues as returned by the solver.
    pub fn raw_values(&self) -> &Vector<T> {
        &self.raw_values
    }

    pub fn degrees(&self) -> &Vector<T> {
        &self.degrees
    }

    pub fn diagnostics(&self) -> &SpectralDiagnostics {
        &self.diagnostics
    }

    pub fn n_points(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }
}

/// Makes the largest-magnitude entry of every column positive. The first
/// index wins among entries of equal magnitude.
pub fn apply_sign_convention<T: Real>(m: &mut Matrix<T>) {
    for mut col in m.column_iter_mut() {
        let mut best = T::zero();
        let mut sign_negative = false;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign_negative = v < T::zero();
            }
        }
        if sign_negative {
            col.neg_mut();
        }
    }
}

/// Eigendecomposition of `I - L`.
///
/// With `rank = None` the full spectrum is computed by a dense symmetric
/// solver. With `Some(r)` only the `r` largest eigenpairs are returned; an
/// iterative Krylov solver is used when its working basis is smaller than
/// the graph, the dense solver otherwise.
pub fn fourier_basis<T: Real>(g: &KernelGraph<T>, rank: Option<usize>) -> Result<FourierBasis<T>> {
    let n = g.n_points();
    if let Some(r) = rank {
        if r == 0 || r > n {
            return Err(Error::InvalidParameter(format!("rank must be in 1..={n}, got {r}")));
        }
    }
    let a = g.normalized_adjacency();
    let opts = KrylovOptions::default();
    match rank {
        Some(r) if opts.basis_size(n, r) < n => {
            let out = top_eigenpairs(&a, r, &opts)?;
            let diag = SpectralDiagnostics {
                solver: "krylov".into(),
                matvecs: out.matvecs,
                restarts: out.restarts,
                max_residual: Some(out.max_residual.as_f64()),
                ..Default::default()
            };
            FourierBasis::finish(out.vectors, out.values, g.degrees().clone(), diag)
        }
        _ => {
            let (vectors, values) = dense_eigen(a, rank.unwrap_or(n))?;
            let diag = SpectralDiagnostics {
                solver: "dense".into(),
                ..Default::default()
            };
            FourierBasis::finish(vectors, values, g.degrees().clone(), diag)
        }
    }
}

/// Top `r` eigenpairs of a symmetric matrix, descending.
pub(crate) fn dense_eigen<T: Real>(a: Matrix<T>, r: usize) -> Result<(Matrix<T>, Vector<T>)> {
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(a, T::machine_eps(), 0).ok_or_else(|| Error::NoConvergence {
        solver: "dense symmetric eigensolver",
        detail: format!("no convergence on a {n}x{n} matrix"),
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    order.truncate(r);
    let vectors = eig.eigenvectors.select_columns(order.iter());
    let values = Vector::from_iterator(r, order.iter().map(|&i| eig.eigenvalues[i]));
    Ok((vectors, values))
}

/// Removes the leading (trivial, eigenvalue 1) eigenpair.
pub fn drop_trivial<T: Real>(b: &FourierBasis<T>) -> Result<FourierBasis<T>> {
    let r = b.rank();
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "cannot drop the trivial eigenpair from a rank-{r} basis"
        )));
    }
    let mut diagnostics = b.diagnostics.clone();
    diagnostics.near_ties = diagnostics
        .near_ties
        .iter()
        .filter(|&&(i, _)| i > 0)
        .map(|&(i, j)| (i - 1, j - 1))
        .collect();
    Ok(FourierBasis {
        vectors: b.vectors.columns(1, r - 1).into_owned(),
        values: b.values.rows(1, r - 1).into_owned(),
        raw_values: b.raw_values.rows(1, r - 1).into_owned(),
        degrees: b.degrees.clone(),
        diagnostics,
    })
}

/// Which degree power turns Fourier harmonics into diffusion coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi0 {
    /// `Φ₀ = D^{-1/2}Ψ`: right eigenvectors of the diffusion operator.
    #[default]
    InverseSqrtDegree,
    /// `Φ₀ = D^{1/2}Ψ`, kept for comparison.
    SqrtDegree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionEmbedding<T: Real> {
    pub phi: Matrix<T>,
    pub values: Vector<T>,
    pub t: u32,
}

/// `Φ_t = Φ₀ Λᵗ` with `Φ₀ = D^{-1/2}Ψ`.
pub fn diffusion_coordinates<T: Real>(b: &FourierBasis<T>, t: u32) -> DiffusionEmbedding<T> {
    diffusion_coordinates_with(b, t, Phi0::default())
}

pub fn diffusion_coordinates_with<T: Real>(b: &FourierBasis<T>, t: u32, convention: Phi0) -> DiffusionEmbedding<T> {
    let scale = b.degrees.map(|d| match convention {
        Phi0::InverseSqrtDegree => T::one() / d.sqrt(),
        Phi0::SqrtDegree => d.sqrt(),
    });
    let powers = b.values.map(|l| int_pow(l, t));
    let phi = Matrix::from_fn(b.n_points(), b.rank(), |i, j| scale[i] * b.vectors[(i, j)] * powers[j]);
    DiffusionEmbedding {
        phi,
        values: b.values.clone(),
        t,
    }
}

/// `x^t` by repeated multiplication, exact for `t = 0` and `t = 1`.
pub(crate) fn int_pow<T: Real>(x: T, t: u32) -> T {
    (0..t).fold(T::one(), |acc, _| acc * x)
}
