//! Thick-restart Krylov solver for the largest eigenpairs of a dense
//! symmetric matrix.
//!
//! The search space is kept explicitly orthonormal (two Gram-Schmidt passes
//! per new vector) and the Ritz pairs come from a full Rayleigh-Ritz
//! projection, so no tridiagonal recurrence is trusted. On restart the best
//! Ritz vectors are kept and the space is extended with the residual of the
//! first unconverged one.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::{Matrix, Real, Vector};

use super::dense_eigen;

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Convergence threshold on every residual `‖Aψ - λψ‖₂`. Raised to a
    /// small multiple of machine epsilon for low-precision scalars.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed of the random start vector.
    pub seed: u64,
    /// Search-space dimension; defaults to `max(2r + 20, r + 50)`.
    pub basis: Option<usize>,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_restarts: 500,
            seed: 0x5EED,
            basis: None,
        }
    }
}

impl KrylovOptions {
    pub fn basis_size(&self, n: usize, r: usize) -> usize {
        self.basis.unwrap_or((2 * r + 20).max(r + 50)).max(r + 1).min(n)
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutput<T: Real> {
    pub vectors: Matrix<T>,
    /// Descending.
    pub values: Vector<T>,
    pub matvecs: usize,
    pub restarts: usize,
    pub max_residual: T,
}

fn random_vector<T: Real>(rng: &mut Rng, n: usize) -> Vector<T> {
    Vector::from_fn(n, |_, _| T::lit(rng.normal()))
}

fn residual_norms<T: Real>(ay: &Matrix<T>, y: &Matrix<T>, theta: &Vector<T>, r: usize) -> Vec<T> {
    (0..r).map(|j| (ay.column(j) - y.column(j) * theta[j]).norm()).collect()
}

/// `r` algebraically largest eigenpairs of the symmetric matrix `a`.
pub fn top_eigenpairs<T: Real>(a: &Matrix<T>, r: usize, opts: &KrylovOptions) -> Result<KrylovOutput<T>> {
    let n = a.nrows();
    if a.ncols() != n || r == 0 || r > n {
        return Err(Error::InvalidParameter(format!(
            "need a square matrix and 1 <= r <= n, got {}x{} and r={r}",
            n,
            a.ncols()
        )));
    }
    let m = opts.basis_size(n, r);
    let tol = T::lit(opts.tol).max(T::machine_eps() * T::lit(64.0));
    let tiny = T::machine_eps().sqrt();
    let mut rng = Rng::new(opts.seed);

    let mut basis = Matrix::<T>::zeros(n, m);
    let mut image = Matrix::<T>::zeros(n, m);
    let mut k = 0;
    let mut v = random_vector::<T>(&mut rng, n);
    let mut matvecs = 0;
    let mut worst = T::zero();

    for restart in 0..=opts.max_restarts {
        let mut fresh = 0;
        while k < m {
            for _ in 0..2 {
                if k > 0 {
                    let q = basis.columns(0, k);
                    let c = q.tr_mul(&v);
                    v -= q * c;
                }
            }
            let nv = v.norm();
            if nv < tiny {
                fresh += 1;
                if fresh > 20 {
                    return Err(Error::NoConvergence {
                        solver: "krylov",
                        detail: format!("could not extend the search space beyond {k} vectors"),
                    });
                }
                v = random_vector(&mut rng, n);
                continue;
            }
            v /= nv;
            let w = a * &v;
            matvecs += 1;
            basis.set_column(k, &v);
            image.set_column(k, &w);
            k += 1;
            v = w;
        }

        let h = basis.tr_mul(&image);
        let h = (&h + h.transpose()) * T::lit(0.5);
        let (s, theta) = dense_eigen(h, m)?;
        let y = &basis * &s;
        let ay = &image * &s;
        let res = residual_norms(&ay, &y, &theta, r);
        worst = res.iter().fold(T::zero(), |acc, &x| acc.max(x));

        if worst <= tol {
            // the cached image drifts across restarts; confirm against A itself
            let yr = y.columns(0, r).into_owned();
            let ayr = a * &yr;
            matvecs += r;
            let true_res = residual_norms(&ayr, &yr, &theta, r);
            let true_worst = true_res.iter().fold(T::zero(), |acc, &x| acc.max(x));
            if true_worst <= tol {
                return Ok(KrylovOutput {
                    vectors: yr,
                    values: theta.rows(0, r).into_owned(),
                    matvecs,
                    restarts: restart,
                    max_residual: true_worst,
                });
            }
            image = a * &basis;
            matvecs += m;
            continue;
        }

        let keep = (m - 10).min(r + (m - r) / 2).max(r).min(m - 1);
        basis.columns_mut(0, keep).copy_from(&y.columns(0, keep));
        image.columns_mut(0, keep).copy_from(&ay.columns(0, keep));
        k = keep;
        let j = res.iter().position(|&x| x > tol).unwrap_or(0);
        v = ay.column(j) - y.column(j) * theta[j];
    }

    Err(Error::NoConvergence {
        solver: "krylov",
        detail: format!(
            "{} restarts, {matvecs} matrix-vector products, largest residual {worst}",
            opts.max_restarts
        ),
    })
}
