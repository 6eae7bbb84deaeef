//! Alignment of datasets that share an underlying manifold but were measured
//! in different, possibly corrupted, feature spaces.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what experiments and file I/O use.

pub mod align;
pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod filters;
pub mod graph;
pub mod io;
pub mod neighbors;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod spectral;

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use scalar::{Matrix, Real, Vector};

pub type Mat = Matrix<f64>;
pub type Vec64 = Vector<f64>;
pub type Data = DataMatrix<f64>;
pub type Basis = spectral::FourierBasis<f64>;
pub type Graph = graph::KernelGraph<f64>;
pub type Alignment = align::AlignmentResult<f64>;
pub type MultiAlignment = align::MultiAlignmentResult<f64>;

/// Crate version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
