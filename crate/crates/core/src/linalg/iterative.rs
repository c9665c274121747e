//! Matrix-free spectral solvers.
//!
//! [`smallest_eigenpairs`] runs thick-restart Lanczos with full
//! reorthogonalisation on the shifted operator `σI − M`, where `σ` is the
//! upper Gershgorin bound, so the wanted bottom of the spectrum of `M`
//! becomes the top of a positive semidefinite operator. The Rayleigh–Ritz
//! step projects explicitly (`H = Vᵀ A V`), which keeps the restart logic
//! simple and exact with respect to the stored basis.
//!
//! [`top_left_singular_vectors`] runs the same solver on `B Bᵀ`, applied
//! as `B (Bᵀ ·)` without forming the product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dense::{axpy, dot, norm, normalize_sign, DenseMatrix};
use super::eigen::{dense_eig_with_ceiling, EigenPairs};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stopping rules shared by the iterative solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Absolute residual tolerance per returned pair.
    pub tol: f64,
    /// Restart budget; `None` means `50·d`.
    pub max_iter: Option<usize>,
    /// Seed for the start vectors.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            seed: 0x005e_ed0f_1a4c,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    fn budget(&self, d: usize) -> usize {
        self.max_iter.unwrap_or(50 * d.max(1))
    }
}

fn random_vector<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::of(rng.sample::<f64, _>(StandardNormal))).collect()
}

/// Orthogonalises `w` against the unit columns in `basis` (two classical
/// Gram–Schmidt passes) and returns its remaining norm.
fn orthogonalize<T: Scalar>(basis: &[Vec<T>], w: &mut [T]) -> T {
    for _ in 0..2 {
        let coeffs: Vec<T> = basis.iter().map(|b| dot(b, w)).collect();
        for (b, c) in basis.iter().zip(coeffs) {
            axpy(-c, b, w);
        }
    }
    norm(w)
}

/// Draws random directions until one survives orthogonalisation against
/// `basis`; `None` once the basis spans the whole space.
fn fresh_direction<T: Scalar>(basis: &[Vec<T>], n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<T>> {
    if basis.len() >= n {
        return None;
    }
    for _ in 0..8 {
        let mut w = random_vector::<T>(rng, n);
        let before = norm(&w);
        let after = orthogonalize(basis, &mut w);
        if after > before * T::of(1e-6) {
            let inv = T::one() / after;
            w.iter_mut().for_each(|x| *x *= inv);
            return Some(w);
        }
    }
    None
}

/// Largest `d` eigenpairs of a symmetric operator given as a closure.
/// Values are returned descending together with their residual norms.
fn lanczos_largest<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    n: usize,
    d: usize,
    opts: &SolverOptions,
) -> Result<(Vec<T>, Vec<Vec<T>>, Vec<T>)> {
    let tol = T::of(opts.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m_max = n.min((2 * d + 20).max(40));
    let keep = (d + (m_max - d) / 2).min(m_max.saturating_sub(1)).max(d);
    let budget = opts.budget(d);

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m_max);
    let mut images: Vec<Vec<T>> = Vec::with_capacity(m_max);
    // Projected matrix `VᵀAV`, one column per basis vector.
    let mut h: Vec<Vec<T>> = Vec::with_capacity(m_max);
    let mut pending: Option<Vec<T>> = Some(random_vector(&mut rng, n));
    let mut worst = T::infinity();

    for restart in 0..=budget {
        while basis.len() < m_max {
            let candidate = pending.take().and_then(|mut w| {
                let before = norm(&w);
                let after = orthogonalize(&basis, &mut w);
                if before > T::zero() && after > before * T::of(1e-10) {
                    let inv = T::one() / after;
                    w.iter_mut().for_each(|x| *x *= inv);
                    Some(w)
                } else {
                    None
                }
            });
            let v = match candidate.or_else(|| fresh_direction(&basis, n, &mut rng)) {
                Some(v) => v,
                None => break,
            };
            let mut av = vec![T::zero(); n];
            apply(&v, &mut av);
            let j = basis.len();
            let mut col: Vec<T> = basis.iter().map(|b| dot(b, &av)).collect();
            col.push(dot(&v, &av));
            for (i, hc) in h.iter_mut().enumerate() {
                hc.push(col[i]);
            }
            h.push(col);
            debug_assert_eq!(h[j].len(), j + 1);
            pending = Some(av.clone());
            basis.push(v);
            images.push(av);
        }

        let m = basis.len();
        let proj = DenseMatrix::from_fn(m, m, |i, j| (h[i][j] + h[j][i]) / T::of(2.0));
        let eig = dense_eig_with_ceiling(&proj, usize::MAX)?;
        let wanted = d.min(m);
        let count = if m == n { wanted } else { keep.min(m) };
        // Descending order of Ritz values.
        let order: Vec<usize> = (0..m).rev().take(count.max(wanted)).collect();
        let mut ritz_vals = Vec::with_capacity(order.len());
        let mut ritz_vecs = Vec::with_capacity(order.len());
        let mut ritz_imgs = Vec::with_capacity(order.len());
        for &k in &order {
            let s = eig.vectors.column(k);
            let mut y = vec![T::zero(); n];
            let mut ay = vec![T::zero(); n];
            for (c, (b, ab)) in s.iter().zip(basis.iter().zip(&images)) {
                axpy(*c, b, &mut y);
                axpy(*c, ab, &mut ay);
            }
            ritz_vals.push(eig.values[k]);
            ritz_vecs.push(y);
            ritz_imgs.push(ay);
        }
        let residuals: Vec<T> = (0..wanted)
            .map(|i| {
                ritz_imgs[i]
                    .iter()
                    .zip(&ritz_vecs[i])
                    .map(|(&a, &y)| {
                        let r = a - ritz_vals[i] * y;
                        r * r
                    })
                    .sum::<T>()
                    .sqrt()
            })
            .collect();
        worst = residuals.iter().copied().fold(T::zero(), T::max);
        if worst <= tol || m == n {
            ritz_vals.truncate(wanted);
            ritz_vecs.truncate(wanted);
            return Ok((ritz_vals, ritz_vecs, residuals));
        }
        if restart == budget {
            break;
        }
        // Thick restart: keep the leading Ritz pairs and continue from the
        // residual of the last expansion, orthogonal to the whole old basis.
        if let Some(w) = pending.as_mut() {
            orthogonalize(&basis, w);
        }
        h = (0..ritz_vals.len())
            .map(|i| {
                let mut c = vec![T::zero(); ritz_vals.len()];
                c[i] = ritz_vals[i];
                c
            })
            .collect();
        basis = ritz_vecs;
        images = ritz_imgs;
    }
    Err(Error::NonConvergence {
        solver: "lanczos",
        iterations: budget,
        residual: worst.as_f64(),
        tol: opts.tol,
    })
}

/// The `d` algebraically smallest eigenpairs of a symmetric sparse matrix,
/// values ascending, each vector sign-normalised.
pub fn smallest_eigenpairs<T: Scalar>(
    m: &SparseMatrix<T>,
    d: usize,
    opts: &SolverOptions,
) -> Result<EigenPairs<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::shape("smallest_eigenpairs", "square matrix", format!("{:?}", m.shape())));
    }
    if d > n {
        return Err(Error::InvalidParameter(format!(
            "requested {d} eigenpairs of an order-{n} matrix"
        )));
    }
    if d == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(n, 0),
        });
    }
    let shift = m.gershgorin_upper().max(T::zero());
    let apply = |x: &[T], y: &mut [T]| {
        m.matvec_into(x, y).expect("square operator");
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = shift * xi - *yi;
        }
    };
    let (vals, mut vecs, _) = lanczos_largest(apply, n, d, opts)?;
    let values: Vec<T> = vals.iter().map(|&t| shift - t).collect();
    for v in vecs.iter_mut() {
        normalize_sign(v);
    }
    Ok(EigenPairs {
        values,
        vectors: DenseMatrix::from_columns(n, &vecs)?,
    })
}

/// Largest-`d` eigenpairs of a symmetric sparse matrix, values descending.
pub fn largest_eigenpairs<T: Scalar>(
    m: &SparseMatrix<T>,
    d: usize,
    opts: &SolverOptions,
) -> Result<EigenPairs<T>> {
    let n = m.rows();
    if m.cols() != n || d > n {
        return Err(Error::InvalidParameter(format!(
            "requested {d} eigenpairs of a {:?} matrix",
            m.shape()
        )));
    }
    let apply = |x: &[T], y: &mut [T]| m.matvec_into(x, y).expect("square operator");
    let (values, mut vecs, _) = lanczos_largest(apply, n, d, opts)?;
    for v in vecs.iter_mut() {
        normalize_sign(v);
    }
    Ok(EigenPairs {
        values,
        vectors: DenseMatrix::from_columns(n, &vecs)?,
    })
}

/// Truncated left singular system of a sparse matrix.
#[derive(Clone, Debug)]
pub struct SingularTriplets<T> {
    /// Singular values, descending.
    pub values: Vec<T>,
    /// Left singular vectors, one per column.
    pub left: DenseMatrix<T>,
}

/// Top-`d` singular values and left singular vectors of `b`.
///
/// The left vectors are the leading eigenvectors of `B Bᵀ`. Convergence is
/// declared when `‖B vᵢ − σᵢ uᵢ‖ ≤ tol` for the implicit right vectors
/// `vᵢ = Bᵀuᵢ / σᵢ`, where `σᵢ` is floored at `√tol·σ₁`.
pub fn top_left_singular_vectors<T: Scalar>(
    b: &SparseMatrix<T>,
    d: usize,
    opts: &SolverOptions,
) -> Result<SingularTriplets<T>> {
    let (rows, cols) = b.shape();
    if d > rows.min(cols) {
        return Err(Error::InvalidParameter(format!(
            "requested {d} singular vectors of a {rows}x{cols} matrix"
        )));
    }
    if d == 0 {
        return Ok(SingularTriplets {
            values: Vec::new(),
            left: DenseMatrix::zeros(rows, 0),
        });
    }
    let bt = b.transpose();
    let apply = |x: &[T], y: &mut [T]| {
        let t = bt.matvec(x).expect("transpose accepts row-space vectors");
        b.matvec_into(&t, y).expect("operator accepts column-space vectors");
    };
    let tol = T::of(opts.tol);
    let attempt = |o: &SolverOptions| -> Result<(Vec<T>, Vec<Vec<T>>, T)> {
        let (theta, vecs, residuals) = lanczos_largest(apply, rows, d, o)?;
        let sigma: Vec<T> = theta.iter().map(|t| t.max(T::zero()).sqrt()).collect();
        // ‖B vᵢ − σᵢ uᵢ‖ = ‖B Bᵀuᵢ − σᵢ² uᵢ‖ / σᵢ for vᵢ = Bᵀuᵢ / σᵢ, with
        // σᵢ floored at √tol·σ₁ for numerically zero singular values.
        let floor = tol.sqrt() * sigma.first().copied().unwrap_or_else(T::zero);
        let worst = sigma
            .iter()
            .zip(&residuals)
            .map(|(&s, &r)| if s.max(floor) > T::zero() { r / s.max(floor) } else { r })
            .fold(T::zero(), T::max);
        Ok((sigma, vecs, worst))
    };
    let (mut sigma, mut vecs, mut worst) = attempt(opts)?;
    if worst > tol {
        // Singular values below 1 need a proportionally tighter eigen-residual.
        let floor = tol.sqrt() * sigma.first().copied().unwrap_or_else(T::zero);
        let smallest = sigma.iter().map(|&s| s.max(floor)).filter(|&s| s > T::zero()).fold(T::one(), T::min);
        (sigma, vecs, worst) = attempt(&opts.with_tol(opts.tol * smallest.as_f64()))?;
    }
    if worst > tol {
        return Err(Error::NonConvergence {
            solver: "lanczos svd",
            iterations: opts.budget(d),
            residual: worst.as_f64(),
            tol: opts.tol,
        });
    }
    for v in vecs.iter_mut() {
        normalize_sign(v);
    }
    Ok(SingularTriplets {
        values: sigma,
        left: DenseMatrix::from_columns(rows, &vecs)?,
    })
}
