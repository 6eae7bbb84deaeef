//! Scalar abstraction shared by the numeric modules.
//!
//! Every numeric routine is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Experiments, file formats and the CLI fix `f64`; the
//! `f32` instantiation exists for memory-bound use and is exercised by tests.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the alignment pipeline.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    /// Machine epsilon of the concrete type.
    fn machine_eps() -> Self;
}

impl Real for f32 {
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}

/// Dense column-major matrix.
pub type Matrix<T> = DMatrix<T>;
/// Dense column vector.
pub type Vector<T> = DVector<T>;

/// Largest absolute entry of a matrix; zero for an empty matrix.
pub fn max_abs<T: Real>(m: &Matrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Casts every entry of a matrix to another scalar type.
pub fn cast_matrix<S: Real, T: Real>(m: &Matrix<S>) -> Matrix<T> {
    m.map(|v| T::lit(v.as_f64()))
}

/// Squared Euclidean distance between row `i` of `a` and row `j` of `b`.
///
/// Summation runs over feature index in ascending order, so the value is
/// bit-identical for `(a, i, b, j)` and `(b, j, a, i)`.
#[inline]
pub fn row_sq_dist<T: Real>(a: &Matrix<T>, i: usize, b: &Matrix<T>, j: usize) -> T {
    let mut acc = T::zero();
    for k in 0..a.ncols() {
        let d = a[(i, k)] - b[(j, k)];
        acc += d * d;
    }
    acc
}

#[inline]
fn slice_sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc += d * d;
    }
    acc
}

/// All pairwise squared distances between rows of `a` (N×N, exactly symmetric).
pub fn pairwise_sq_dists<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.nrows();
    // points as contiguous columns
    let pts = a.transpose();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let pi = pts.column(i);
        let pi = pi.as_slice();
        for j in (i + 1)..n {
            let d = slice_sq_dist(pi, pts.column(j).as_slice());
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Squared distances from every row of `queries` to every row of `reference`.
pub fn cross_sq_dists<T: Real>(queries: &Matrix<T>, reference: &Matrix<T>) -> Matrix<T> {
    let q = queries.transpose();
    let r = reference.transpose();
    let mut out = Matrix::zeros(queries.nrows(), reference.nrows());
    for j in 0..r.ncols() {
        let rj = r.column(j);
        let rj = rj.as_slice();
        for i in 0..q.ncols() {
            out[(i, j)] = slice_sq_dist(q.column(i).as_slice(), rj);
        }
    }
    out
}
