//! Dense symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! algorithm with Wilkinson-style shifts (the classic `tred2`/`tql2` pair).
//! Used as the reference oracle for the iterative solvers and directly by
//! the spectrum analysis tools, which work on full decompositions.

use super::dense::{normalize_column_signs, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest matrix order accepted by [`dense_eig`].
pub const DEFAULT_DENSE_CEILING: usize = 2000;

/// Eigenvalues with one eigenvector per column of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> EigenPairs<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_error(&self) -> T {
        let gram = self.vectors.t_matmul(&self.vectors).expect("square gram");
        gram.max_abs_diff(&DenseMatrix::identity(self.len()))
            .expect("gram is k x k")
    }

    /// `‖M vᵢ − λᵢ vᵢ‖` for every pair, with `M` applied through `apply`.
    pub fn residuals(&self, apply: impl Fn(&DenseMatrix<T>) -> DenseMatrix<T>) -> Vec<T> {
        let mv = apply(&self.vectors);
        (0..self.len())
            .map(|j| {
                (0..self.vectors.rows())
                    .map(|i| {
                        let r = mv[(i, j)] - self.values[j] * self.vectors[(i, j)];
                        r * r
                    })
                    .sum::<T>()
                    .sqrt()
            })
            .collect()
    }

    /// Projector `V Vᵀ` onto the span of the vectors.
    pub fn projector(&self) -> DenseMatrix<T> {
        self.vectors.matmul_t(&self.vectors).expect("n x n projector")
    }
}

/// Full decomposition of a symmetric matrix with eigenvalues ascending.
pub fn dense_eig<T: Scalar>(m: &DenseMatrix<T>) -> Result<EigenPairs<T>> {
    dense_eig_with_ceiling(m, DEFAULT_DENSE_CEILING)
}

pub fn dense_eig_with_ceiling<T: Scalar>(m: &DenseMatrix<T>, ceiling: usize) -> Result<EigenPairs<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::shape("dense_eig", "square matrix", format!("{:?}", m.shape())));
    }
    if n > ceiling {
        return Err(Error::CeilingExceeded { size: n, ceiling });
    }
    let scale = m.as_slice().iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    if !m.is_symmetric(T::of(1e-10) * scale.max(T::one())) {
        return Err(Error::InvalidParameter("dense_eig requires a symmetric matrix".into()));
    }
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    // Symmetrise exactly before reduction.
    let mut v = DenseMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) / T::of(2.0));
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    normalize_column_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

fn tred2<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for &dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let update = f * e[k] + g * d[k];
                    v[(k, j)] -= update;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let update = g * d[k];
                    v[(k, j)] -= update;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::of(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 60 {
                    return Err(Error::NonConvergence {
                        solver: "tql2",
                        iterations,
                        residual: e[l].abs().as_f64(),
                        tol: (eps * tst1).as_f64(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
