//! Gegenbauer polynomial bases and the classic spectral filters they are
//! compared against.
//!
//! The recursion used throughout is
//!
//! ```text
//! J₀(λ) = 1
//! J₁(λ) = c₁ λ                      c₁ = α + ½  (or α + 1)
//! J_k(λ) = ω_k λ J_{k−1}(λ) − ω′_k J_{k−2}(λ)
//! ω_k  = (2k + 2α − 1)(k + α − 1) / (k (k + 2α − 1))
//! ω′_k = (k + α − ½)(k + α − 3/2) / (k (k + 2α − 1))
//! ```
//!
//! With `c₁ = α + ½` these are Jacobi polynomials `P^{(α−½, α−½)}`, i.e.
//! Gegenbauer polynomials up to the factor `(α+½)_k / (2α)_k`; at `α = ½`
//! they are exactly the Legendre polynomials. The scalar routines are generic
//! over [`Field`] so they can be evaluated in exact rational arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_eig_with_ceiling, DenseMatrix, SparseMatrix, DEFAULT_DENSE_CEILING};
use crate::scalar::{Field, Scalar};

/// Which first-order term starts the recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstOrderCoefficient {
    /// `J₁ = (α + ½) λ`; gives Legendre polynomials at `α = ½`.
    #[default]
    AlphaPlusHalf,
    /// `J₁ = (α + 1) λ`.
    AlphaPlusOne,
}

impl fmt::Display for FirstOrderCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FirstOrderCoefficient::AlphaPlusHalf => "alpha_plus_half",
            FirstOrderCoefficient::AlphaPlusOne => "alpha_plus_one",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GegenbauerParams<T> {
    alpha: T,
    first_order: FirstOrderCoefficient,
}

impl<T: Field> GegenbauerParams<T> {
    /// Rejects `α < −½`.
    pub fn new(alpha: T, first_order: FirstOrderCoefficient) -> Result<Self> {
        if alpha < T::ratio(-1, 2) {
            return Err(Error::InvalidParameter(format!(
                "gegenbauer alpha must be >= -1/2, got {alpha:?}"
            )));
        }
        Ok(Self { alpha, first_order })
    }

    pub fn with_alpha(alpha: T) -> Result<Self> {
        Self::new(alpha, FirstOrderCoefficient::default())
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn first_order(&self) -> FirstOrderCoefficient {
        self.first_order
    }

    /// `c₁` in `J₁ = c₁ λ`.
    pub fn first_coefficient(&self) -> T {
        match self.first_order {
            FirstOrderCoefficient::AlphaPlusHalf => self.alpha.clone() + T::ratio(1, 2),
            FirstOrderCoefficient::AlphaPlusOne => self.alpha.clone() + T::one(),
        }
    }

    /// Recursion weights `(ω_j, ω′_j)` for `j = 2..=k`.
    pub fn weights_up_to(&self, k: usize) -> Result<Vec<(T, T)>> {
        (2..=k).map(|j| gegenbauer_weights(j, &self.alpha)).collect()
    }
}

/// `(ω_k, ω′_k)` for `k ≥ 2`.
pub fn gegenbauer_weights<T: Field>(k: usize, alpha: &T) -> Result<(T, T)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "recursion weights start at order 2, got {k}"
        )));
    }
    let kf = T::from_int(k as i64);
    let a = alpha.clone();
    let two = T::from_int(2);
    let den = kf.clone() * (kf.clone() + two.clone() * a.clone() - T::one());
    if den == T::zero() {
        return Err(Error::InvalidParameter(format!(
            "k(k+2α−1) vanishes at k = {k}, α = {alpha:?}"
        )));
    }
    let omega = (two.clone() * kf.clone() + two * a.clone() - T::one())
        * (kf.clone() + a.clone() - T::one())
        / den.clone();
    let omega_prime = (kf.clone() + a.clone() - T::ratio(1, 2)) * (kf + a - T::ratio(3, 2)) / den;
    Ok((omega, omega_prime))
}

/// `J_k(λ)` by the three-term recursion.
pub fn gegenbauer_scalar<T: Field>(lambda: &T, k: usize, params: &GegenbauerParams<T>) -> Result<T> {
    Ok(gegenbauer_sequence(lambda, k, params)?.pop().expect("order 0 is always present"))
}

/// `[J₀(λ), …, J_k(λ)]`.
pub fn gegenbauer_sequence<T: Field>(lambda: &T, k: usize, params: &GegenbauerParams<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(T::one());
    if k == 0 {
        return Ok(out);
    }
    out.push(params.first_coefficient() * lambda.clone());
    for (omega, omega_prime) in params.weights_up_to(k)? {
        let n = out.len();
        let next = omega * lambda.clone() * out[n - 1].clone() - omega_prime * out[n - 2].clone();
        out.push(next);
    }
    Ok(out)
}

/// Pochhammer rising factorial `(x)_n`.
pub fn pochhammer<T: Field>(x: &T, n: usize) -> T {
    (0..n).fold(T::one(), |acc, j| acc * (x.clone() + T::from_int(j as i64)))
}

/// Standard Gegenbauer polynomial `C_k^α(λ)` from its explicit sum
/// `Σ_{i ≤ k/2} (−1)^i (α)_{k−i} / (i! (k−2i)!) · (2λ)^{k−2i}`.
pub fn gegenbauer_closed_form<T: Field>(lambda: &T, k: usize, alpha: &T) -> Result<T> {
    if *alpha == T::zero() {
        return Err(Error::InvalidParameter(
            "closed form is undefined for alpha = 0".into(),
        ));
    }
    let two_lambda = T::from_int(2) * lambda.clone();
    let one = T::one();
    let mut sum = T::zero();
    for i in 0..=k / 2 {
        let p = k - 2 * i;
        let mut term = pochhammer(alpha, k - i) / (pochhammer(&one, i) * pochhammer(&one, p));
        for _ in 0..p {
            term = term * two_lambda.clone();
        }
        if i % 2 == 1 {
            term = -term;
        }
        sum = sum + term;
    }
    Ok(sum)
}

/// Ratio `(α+½)_k / (2α)_k` linking the recursion (with the default first-order
/// coefficient) to [`gegenbauer_closed_form`].
pub fn closed_form_scale<T: Field>(k: usize, alpha: &T) -> Result<T> {
    let den = pochhammer(&(T::from_int(2) * alpha.clone()), k);
    if den == T::zero() {
        return Err(Error::InvalidParameter(format!(
            "(2α)_k vanishes at k = {k}, α = {alpha:?}"
        )));
    }
    Ok(pochhammer(&(alpha.clone() + T::ratio(1, 2)), k) / den)
}

/// `J_k(Â) h`, computed with `k` sparse products and without forming `J_k(Â)`.
pub fn gegenbauer_apply<T: Scalar>(
    a_hat: &SparseMatrix<T>,
    h: &DenseMatrix<T>,
    k: usize,
    params: &GegenbauerParams<T>,
) -> Result<DenseMatrix<T>> {
    if a_hat.rows() != a_hat.cols() || a_hat.cols() != h.rows() {
        return Err(Error::shape(
            "gegenbauer_apply",
            format!("square operator matching {} rows", h.rows()),
            format!("{:?}", a_hat.shape()),
        ));
    }
    if k == 0 {
        return Ok(h.clone());
    }
    let weights = params.weights_up_to(k)?;
    let mut prev = h.clone();
    let mut cur = a_hat.spmm(h)?.scaled(params.first_coefficient());
    for (omega, omega_prime) in weights {
        let mut next = a_hat.spmm(&cur)?;
        for (n, &p) in next.as_mut_slice().iter_mut().zip(prev.as_slice()) {
            *n = omega * *n - omega_prime * p;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// Spectral filter shapes used for the curve-fitting comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FilterKind {
    /// `λ^K`.
    KHop { k: usize },
    /// `Σ_{k ≤ K} α^k λ^k`.
    Ppr { alpha: f64, k: usize },
    /// `Σ_{k ≤ K} e^{−α} α^k / k! · λ^k`.
    Hkpr { alpha: f64, k: usize },
    /// `(1 − (1−β)(1−λ)) / (1 − (2 − β + 1/α)(1−λ))`.
    GnnLf { alpha: f64, beta: f64 },
    /// `(1 + β(1−λ)) / (1 − (1 − β − 1/α)(1−λ))`.
    GnnHf { alpha: f64, beta: f64 },
    /// `J_k(λ)` from the recursion above.
    Gegenbauer {
        alpha: f64,
        k: usize,
        #[serde(default)]
        first_order: FirstOrderCoefficient,
    },
}

/// Denominators smaller than this are treated as poles.
const POLE_TOLERANCE: f64 = 1e-12;

impl FilterKind {
    /// The six filters with the hyperparameters used for the frequency-response study.
    pub fn reference_set() -> Vec<FilterKind> {
        vec![
            FilterKind::KHop { k: 3 },
            FilterKind::Ppr { alpha: 0.9, k: 7 },
            FilterKind::Hkpr { alpha: 2.0, k: 7 },
            FilterKind::GnnLf { alpha: 0.1, beta: 0.75 },
            FilterKind::GnnHf { alpha: 0.1, beta: 1.0 },
            FilterKind::Gegenbauer {
                alpha: 1.5,
                k: 3,
                first_order: FirstOrderCoefficient::AlphaPlusHalf,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::KHop { .. } => "k_hop",
            FilterKind::Ppr { .. } => "ppr",
            FilterKind::Hkpr { .. } => "hkpr",
            FilterKind::GnnLf { .. } => "gnn_lf",
            FilterKind::GnnHf { .. } => "gnn_hf",
            FilterKind::Gegenbauer { .. } => "gegenbauer",
        }
    }

    pub fn hyperparameters(&self) -> BTreeMap<&'static str, f64> {
        let pairs: Vec<(&'static str, f64)> = match *self {
            FilterKind::KHop { k } => vec![("K", k as f64)],
            FilterKind::Ppr { alpha, k } | FilterKind::Hkpr { alpha, k } => {
                vec![("alpha", alpha), ("K", k as f64)]
            }
            FilterKind::GnnLf { alpha, beta } | FilterKind::GnnHf { alpha, beta } => {
                vec![("alpha", alpha), ("beta", beta)]
            }
            FilterKind::Gegenbauer { alpha, k, .. } => vec![("alpha", alpha), ("k", k as f64)],
        };
        pairs.into_iter().collect()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.name())));
        match *self {
            FilterKind::Ppr { alpha, .. } | FilterKind::Hkpr { alpha, .. } if !alpha.is_finite() => {
                bad("alpha must be finite")
            }
            FilterKind::GnnLf { alpha, beta } | FilterKind::GnnHf { alpha, beta }
                if !(alpha.is_finite() && beta.is_finite()) || alpha == 0.0 =>
            {
                bad("alpha must be finite and nonzero, beta finite")
            }
            FilterKind::Gegenbauer { alpha, .. } if !(alpha >= -0.5) => bad("alpha must be >= -1/2"),
            _ => Ok(()),
        }
    }

    /// `g(λ)`, or `None` at a pole of the rational filters.
    pub fn evaluate<T: Scalar>(&self, lambda: T) -> Result<Option<T>> {
        self.validate()?;
        let poly = |coeffs: Vec<T>| coeffs.into_iter().rev().fold(T::zero(), |acc, c| acc * lambda + c);
        let value = match *self {
            FilterKind::KHop { k } => lambda.powi(k as i32),
            FilterKind::Ppr { alpha, k } => poly(series_coefficients(SeriesWeights::Geometric { alpha, scale: 1.0 }, k)),
            FilterKind::Hkpr { alpha, k } => poly(series_coefficients(SeriesWeights::Poisson { alpha }, k)),
            FilterKind::GnnLf { alpha, beta } => {
                let (alpha, beta) = (T::of(alpha), T::of(beta));
                let x = T::one() - lambda;
                let den = T::one() - (T::of(2.0) - beta + alpha.recip()) * x;
                if den.abs() < T::of(POLE_TOLERANCE) {
                    return Ok(None);
                }
                (T::one() - (T::one() - beta) * x) / den
            }
            FilterKind::GnnHf { alpha, beta } => {
                let (alpha, beta) = (T::of(alpha), T::of(beta));
                let x = T::one() - lambda;
                let den = T::one() - (T::one() - beta - alpha.recip()) * x;
                if den.abs() < T::of(POLE_TOLERANCE) {
                    return Ok(None);
                }
                (T::one() + beta * x) / den
            }
            FilterKind::Gegenbauer { alpha, k, first_order } => {
                let params = GegenbauerParams::new(T::of(alpha), first_order)?;
                gegenbauer_scalar(&lambda, k, &params)?
            }
        };
        Ok(Some(value))
    }
}

#[derive(Clone, Copy, Debug)]
enum SeriesWeights {
    /// `scale · α^k`.
    Geometric { alpha: f64, scale: f64 },
    /// `e^{−α} α^k / k!`.
    Poisson { alpha: f64 },
}

fn series_coefficients<T: Scalar>(weights: SeriesWeights, k: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(k + 1);
    match weights {
        SeriesWeights::Geometric { alpha, scale } => {
            let mut c = T::of(scale);
            for _ in 0..=k {
                out.push(c);
                c *= T::of(alpha);
            }
        }
        SeriesWeights::Poisson { alpha } => {
            let mut c = T::of((-alpha).exp());
            for j in 0..=k {
                out.push(c);
                c = c * T::of(alpha) / T::of((j + 1) as f64);
            }
        }
    }
    out
}

/// A filter sampled on a grid of eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterCurve {
    pub kind: FilterKind,
    pub samples: Vec<(f64, f64)>,
    /// Grid points dropped because they sit on a pole.
    pub skipped: Vec<f64>,
}

impl FilterCurve {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn hyperparameters(&self) -> BTreeMap<&'static str, f64> {
        self.kind.hyperparameters()
    }

    pub fn has_skipped_samples(&self) -> bool {
        !self.skipped.is_empty()
    }

    /// Value at the sample whose λ is closest to `lambda`.
    pub fn nearest(&self, lambda: f64) -> Option<f64> {
        if self.samples.is_empty() {
            return None;
        }
        let p = self.samples.partition_point(|&(l, _)| l < lambda);
        let candidates = [p.checked_sub(1), (p < self.samples.len()).then_some(p)];
        candidates
            .into_iter()
            .flatten()
            .min_by(|&a, &b| {
                (self.samples[a].0 - lambda)
                    .abs()
                    .total_cmp(&(self.samples[b].0 - lambda).abs())
            })
            .map(|i| self.samples[i].1)
    }

    /// CSV with header `lambda,value` and 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda,value")?;
        for &(l, v) in &self.samples {
            writeln!(w, "{l:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// `n` evenly spaced points from −1 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default sampling resolution for [`classic_filter_curve`].
pub const CURVE_GRID_POINTS: usize = 201;

/// Samples `kind` at `lambdas` (strictly increasing).
pub fn classic_filter_curve(kind: FilterKind, lambdas: &[f64]) -> Result<FilterCurve> {
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "curve sample points must be strictly increasing".into(),
        ));
    }
    let mut samples = Vec::with_capacity(lambdas.len());
    let mut skipped = Vec::new();
    for &l in lambdas {
        match kind.evaluate(l)? {
            Some(v) if v.is_finite() => samples.push((l, v)),
            _ => skipped.push(l),
        }
    }
    Ok(FilterCurve { kind, samples, skipped })
}

/// Proximity measures that are polynomials (or truncated power series) in an
/// adjacency operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProximityKind {
    /// `A²`; intended for the unnormalised adjacency.
    CommonNeighbors,
    /// `Â^K`.
    KHop { k: usize },
    /// `Σ_{k ≤ K} (1−α) α^k Â^k`.
    Ppr { alpha: f64, k: usize },
    /// `Σ_{k ≤ K} e^{−α} α^k / k! · Â^k`.
    Hkpr { alpha: f64, k: usize },
}

/// Truncation order used by the series proximity measures unless stated.
pub const DEFAULT_SERIES_ORDER: usize = 20;

impl ProximityKind {
    /// Polynomial coefficients `c₀, …, c_K`.
    pub fn coefficients<T: Scalar>(&self) -> Vec<T> {
        match *self {
            ProximityKind::CommonNeighbors => vec![T::zero(), T::zero(), T::one()],
            ProximityKind::KHop { k } => {
                let mut c = vec![T::zero(); k + 1];
                c[k] = T::one();
                c
            }
            ProximityKind::Ppr { alpha, k } => {
                series_coefficients(SeriesWeights::Geometric { alpha, scale: 1.0 - alpha }, k)
            }
            ProximityKind::Hkpr { alpha, k } => series_coefficients(SeriesWeights::Poisson { alpha }, k),
        }
    }

    /// `f(λ) = Σ c_k λ^k`.
    pub fn spectral_response<T: Scalar>(&self, lambda: T) -> T {
        self.coefficients::<T>()
            .into_iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * lambda + c)
    }
}

fn check_oracle_size<T: Scalar>(a: &SparseMatrix<T>) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::shape("proximity_matrix", "square operator", format!("{:?}", a.shape())));
    }
    if a.rows() > DEFAULT_DENSE_CEILING {
        return Err(Error::CeilingExceeded {
            size: a.rows(),
            ceiling: DEFAULT_DENSE_CEILING,
        });
    }
    Ok(())
}

/// Matrix-power series form `Σ c_k A^k`.
pub fn proximity_matrix<T: Scalar>(kind: ProximityKind, a: &SparseMatrix<T>) -> Result<DenseMatrix<T>> {
    check_oracle_size(a)?;
    let n = a.rows();
    let mut power = DenseMatrix::identity(n);
    let mut acc = DenseMatrix::zeros(n, n);
    for (j, c) in kind.coefficients::<T>().into_iter().enumerate() {
        if j > 0 {
            power = a.spmm(&power)?;
        }
        if c != T::zero() {
            acc.axpy(c, &power)?;
        }
    }
    Ok(acc)
}

/// Eigendecomposition form `U f(Λ) Uᵀ`.
pub fn proximity_matrix_spectral<T: Scalar>(kind: ProximityKind, a: &SparseMatrix<T>) -> Result<DenseMatrix<T>> {
    check_oracle_size(a)?;
    let eig = dense_eig_with_ceiling(&a.to_dense(), DEFAULT_DENSE_CEILING)?;
    let f: Vec<T> = eig.values.iter().map(|&l| kind.spectral_response(l)).collect();
    let scaled = DenseMatrix::from_fn(a.rows(), f.len(), |i, j| eig.vectors[(i, j)] * f[j]);
    scaled.matmul_t(&eig.vectors)
}
