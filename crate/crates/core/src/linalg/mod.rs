//! Sparse and dense kernels plus the spectral solvers built on them.

mod dense;
mod eigen;
mod iterative;
mod sparse;

pub use dense::{normalize_column_signs, normalize_sign, DenseMatrix};
pub use eigen::{dense_eig, dense_eig_with_ceiling, EigenPairs, DEFAULT_DENSE_CEILING};
pub use iterative::{
    largest_eigenpairs, smallest_eigenpairs, top_left_singular_vectors, SingularTriplets,
    SolverOptions,
};
pub use sparse::SparseMatrix;

/// Sparse × dense product; see [`SparseMatrix::spmm`].
pub fn spmm<T: crate::Scalar>(
    m: &SparseMatrix<T>,
    x: &DenseMatrix<T>,
) -> crate::Result<DenseMatrix<T>> {
    m.spmm(x)
}
