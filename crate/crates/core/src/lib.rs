//! Link sign prediction on signed bipartite graphs with Gegenbauer
//! polynomial filters.
//!
//! The crate covers the whole pipeline:
//!
//! - [`graph`]: edge-list ingestion, seeded splits and the normalised
//!   adjacency, Laplacian and cosine-similarity operators.
//! - [`linalg`]: dense and CSR matrices, a Lanczos eigensolver and a
//!   truncated SVD.
//! - [`features`]: spectral node features from the bottom Laplacian
//!   eigenvectors and the top singular vectors of the cosine block matrix.
//! - [`filter`]: the Gegenbauer recursion applied matrix-free, classic
//!   filter curves and proximity measures.
//! - [`model`]: the sign-aware convolutional network with hand-written
//!   gradients, Adam and checkpoints.
//! - [`metrics`], [`pipeline`], [`analysis`] and [`selftest`]: evaluation,
//!   end-to-end runs, the spectral curve-fitting study and oracle checks.
//!
//! Numerical code is generic over [`Scalar`] (`f32`, `f64`); the polynomial
//! recurrences additionally accept any [`Field`], including exact rationals.
//!
//! ```
//! use gegennet::filter::{gegenbauer_scalar, GegenbauerParams};
//!
//! let p = GegenbauerParams::with_alpha(0.5).unwrap();
//! // Legendre P₂(x) = (3x² − 1) / 2
//! let j2 = gegenbauer_scalar(&0.5f64, 2, &p).unwrap();
//! assert!((j2 + 0.125).abs() < 1e-15);
//! ```

pub mod analysis;
pub mod error;
pub mod features;
pub mod filter;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod selftest;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};
pub use scalar::{Field, Scalar};

pub type DenseMatrixF64 = linalg::DenseMatrix<f64>;
pub type DenseMatrixF32 = linalg::DenseMatrix<f32>;
pub type SparseMatrixF64 = linalg::SparseMatrix<f64>;
pub type SparseMatrixF32 = linalg::SparseMatrix<f32>;
pub type EigenPairsF64 = linalg::EigenPairs<f64>;
pub type SpectralFeaturesF64 = features::SpectralFeatures<f64>;
pub type ModelParamsF64 = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type GegenbauerParamsF64 = filter::GegenbauerParams<f64>;
/// Exact-arithmetic filter parameters.
pub type GegenbauerParamsQ = filter::GegenbauerParams<num_rational::Ratio<i64>>;
