use rayon::prelude::*;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PARALLEL_WORK: usize = 1 << 16;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are in range")
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::IndexOutOfRange(format!(
                "entry ({r}, {c}) in a {rows}x{cols} matrix"
            )));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry exists") += v;
            } else {
                indices.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut kept_indices = Vec::with_capacity(indices.len());
        let mut kept_values = Vec::with_capacity(values.len());
        for ((c, v), r) in indices.into_iter().zip(values).zip(row_of) {
            if v != T::zero() {
                kept_indices.push(c);
                kept_values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices: kept_indices,
            values: kept_values,
        })
    }

    pub fn from_dense(m: &DenseMatrix<T>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), triplets).expect("dense indices are in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// Iterates all stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, vals) = self.row(i);
            idx.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (idx, vals) = self.row(i);
        match idx.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for (i, j, v) in self.iter() {
            let p = next[j];
            indices[p] = i;
            values[p] = v;
            next[j] += 1;
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    /// Sparse × dense product. Each output row accumulates its stored entries
    /// in increasing column order, so the result does not depend on how rows
    /// are scheduled across threads.
    pub fn spmm(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.cols != x.rows() {
            return Err(Error::shape(
                "spmm",
                format!("{} rows in the dense operand", self.cols),
                format!("{}", x.rows()),
            ));
        }
        let width = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, width);
        if width == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [T])| {
            let (idx, vals) = self.row(i);
            for (&j, &a) in idx.iter().zip(vals) {
                for (o, &b) in out_row.iter_mut().zip(x.row(j)) {
                    *o += a * b;
                }
            }
        };
        if self.nnz() * width >= PARALLEL_WORK {
            out.as_mut_slice()
                .par_chunks_mut(width)
                .enumerate()
                .for_each(kernel);
        } else {
            out.as_mut_slice()
                .chunks_mut(width)
                .enumerate()
                .for_each(kernel);
        }
        Ok(out)
    }

    /// Writes `self · x` into `y`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.cols || y.len() != self.rows {
            return Err(Error::shape(
                "matvec",
                format!("x of length {}, y of length {}", self.cols, self.rows),
                format!("x of length {}, y of length {}", x.len(), y.len()),
            ));
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (idx, vals) = self.row(i);
            *yi = idx.iter().zip(vals).fold(T::zero(), |acc, (&j, &a)| acc + a * x[j]);
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).1.iter().copied().sum()).collect()
    }

    /// Column sums (equal to row sums of the transpose).
    pub fn col_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.cols];
        for (_, j, v) in self.iter() {
            s[j] += v;
        }
        s
    }

    /// Returns `diag(left) · self · diag(right)`, dropping entries that become zero.
    pub fn scale_rows_cols(&self, left: &[T], right: &[T]) -> Result<Self> {
        if left.len() != self.rows || right.len() != self.cols {
            return Err(Error::shape(
                "scale_rows_cols",
                format!("{} and {} scale factors", self.rows, self.cols),
                format!("{} and {}", left.len(), right.len()),
            ));
        }
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().map(|(i, j, v)| (i, j, left[i] * v * right[j])),
        )
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(i, j, v)| (i, j, alpha * v)))
            .expect("indices unchanged")
    }

    /// `alpha · self + beta · other`.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "linear_combination",
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter()
                .map(|(i, j, v)| (i, j, alpha * v))
                .chain(other.iter().map(|(i, j, v)| (i, j, beta * v))),
        )
    }

    /// Bit-exact symmetry: every stored `(i, j, v)` has a stored mirror `(j, i, v)`.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.iter().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Upper Gershgorin bound on the spectrum of a symmetric matrix.
    pub fn gershgorin_upper(&self) -> T {
        (0..self.rows)
            .map(|i| {
                let (idx, vals) = self.row(i);
                idx.iter().zip(vals).fold(T::zero(), |acc, (&j, &v)| {
                    if j == i {
                        acc + v
                    } else {
                        acc + v.abs()
                    }
                })
            })
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_canonicalised() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, -1.0), (0, 0, 0.0), (0, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 2), 0.0);
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn spmm_identity_and_zero() {
        let x = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 2.5);
        assert_eq!(SparseMatrix::identity(4).spmm(&x).unwrap(), x);
        let z = SparseMatrix::<f64>::zeros(5, 4).spmm(&x).unwrap();
        assert_eq!(z, DenseMatrix::zeros(5, 3));
        assert!(SparseMatrix::<f64>::zeros(3, 3).spmm(&x).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let m = SparseMatrix::from_triplets(3, 2, vec![(0, 1, 1.0), (2, 0, 4.0), (1, 1, -2.0)])
            .unwrap();
        let t = m.transpose();
        assert_eq!(t.shape(), (2, 3));
        assert_eq!(t.get(1, 2), 0.0);
        assert_eq!(t.get(0, 2), 4.0);
        assert_eq!(t.transpose(), m);
        assert_eq!(t.to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn row_and_column_sums() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)])
            .unwrap();
        assert_eq!(m.row_sums(), vec![3.0, 3.0]);
        assert_eq!(m.col_sums(), vec![1.0, 5.0]);
        assert!(!m.is_symmetric());
    }
}
