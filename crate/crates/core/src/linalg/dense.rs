use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Work (multiply-adds) above which dense products fan out over rows.
const PARALLEL_WORK: usize = 1 << 16;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "DenseMatrix::from_vec",
                format!("{} values", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::shape(
                    "DenseMatrix::from_rows",
                    format!("{cols} columns"),
                    format!("{} columns in row {i}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Stacks column vectors side by side.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            m.set_column(j, c)?;
        }
        Ok(m)
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) -> Result<()> {
        if values.len() != self.rows || j >= self.cols {
            return Err(Error::shape(
                "DenseMatrix::set_column",
                format!("column < {} of length {}", self.cols, self.rows),
                format!("column {j} of length {}", values.len()),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
        Ok(())
    }

    /// Copies columns `start..end` into a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.cols, "column block out of range");
        Self::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                op,
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        Ok(())
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::shape(
                "matmul",
                format!("{} rows on the right", self.cols),
                format!("{}", other.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        if other.cols == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [T])| {
            let a_row = self.row(i);
            for (k, &a) in a_row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        };
        if self.rows * self.cols * other.cols >= PARALLEL_WORK {
            out.data
                .par_chunks_mut(other.cols)
                .enumerate()
                .for_each(kernel);
        } else {
            out.data.chunks_mut(other.cols).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materialising the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::shape(
                "t_matmul",
                format!("{} rows on the right", self.rows),
                format!("{}", other.rows),
            ));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        if other.cols == 0 {
            return Ok(out);
        }
        let kernel = |(p, out_row): (usize, &mut [T])| {
            for i in 0..self.rows {
                let a = self.data[i * self.cols + p];
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(i)) {
                    *o += a * b;
                }
            }
        };
        if self.rows * self.cols * other.cols >= PARALLEL_WORK {
            out.data
                .par_chunks_mut(other.cols)
                .enumerate()
                .for_each(kernel);
        } else {
            out.data.chunks_mut(other.cols).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// `self · otherᵀ`.
    pub fn matmul_t(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::shape(
                "matmul_t",
                format!("{} columns on the right", self.cols),
                format!("{}", other.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        if other.rows == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [T])| {
            let a_row = self.row(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                *o = dot(a_row, other.row(j));
            }
        };
        if self.rows * self.cols * other.rows >= PARALLEL_WORK {
            out.data
                .par_chunks_mut(other.rows)
                .enumerate()
                .for_each(kernel);
        } else {
            out.data.chunks_mut(other.rows).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self { data, ..*self })
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_same_shape(other, "axpy")?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: T) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "hadamard")?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).collect();
        Ok(Self { data, ..*self })
    }

    /// Concatenates matrices with equal row counts left to right.
    pub fn hstack(blocks: &[&Self]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if let Some(b) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::shape("hstack", format!("{rows} rows"), format!("{}", b.rows)));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            let mut offset = 0;
            let out_row = out.row_mut(i);
            for b in blocks {
                out_row[offset..offset + b.cols].copy_from_slice(b.row(i));
                offset += b.cols;
            }
        }
        Ok(out)
    }

    /// Copies rows `start..end` into a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows, "row block out of range");
        Self {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Converts element type, e.g. `f64 → f32`.
    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha · x`.
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn normalize_sign<T: Scalar>(v: &mut [T]) {
    let mut best = T::zero();
    let mut best_val = T::zero();
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            best_val = x;
        }
    }
    if best_val < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Applies [`normalize_sign`] to every column.
pub fn normalize_column_signs<T: Scalar>(m: &mut DenseMatrix<T>) {
    for j in 0..m.cols() {
        let mut c = m.column(j);
        normalize_sign(&mut c);
        m.set_column(j, &c).expect("column shape is preserved");
    }
}
