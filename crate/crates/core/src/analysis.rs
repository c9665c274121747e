//! Frequency-response study: how strongly each eigenvector of a training
//! operator aligns with held-out edges, and how well fixed filters fit that
//! profile.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterCurve;
use crate::graph::{build_sign_matrices, normalize_adjacency, symmetrize, EdgeSplit, Sign, SignedBipartiteGraph};
use crate::linalg::{dense_eig, SparseMatrix};
use crate::scalar::Scalar;

/// Name recorded alongside every signal describing how `Y` was built.
pub const TARGET_DEFINITION: &str = "symmetrized unnormalized 0/1 indicator of held-out edges";

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSignal {
    pub source_sign: Sign,
    pub target_sign: Sign,
    /// `(λᵢ, uᵢᵀ Y uᵢ)` sorted by `λ`.
    pub points: Vec<(f64, f64)>,
}

/// `(λᵢ, uᵢᵀ Y uᵢ)` for the full eigendecomposition `Â = U Λ Uᵀ`.
pub fn spectral_signal<T: Scalar>(a_hat: &SparseMatrix<T>, y: &SparseMatrix<T>) -> Result<Vec<(f64, f64)>> {
    if y.shape() != a_hat.shape() {
        return Err(Error::shape("spectral_signal", format!("{:?}", a_hat.shape()), format!("{:?}", y.shape())));
    }
    let y_dense = y.to_dense();
    let scale = y.values().iter().fold(T::one(), |a, v| a.max(v.abs()));
    if !y_dense.is_symmetric(T::of(1e-12) * scale) {
        return Err(Error::InvalidParameter("spectral_signal requires a symmetric target".into()));
    }
    let eig = dense_eig(&a_hat.to_dense())?;
    let yu = y.spmm(&eig.vectors)?;
    let n = a_hat.rows();
    Ok((0..eig.len())
        .map(|j| {
            let r: T = (0..n).map(|i| eig.vectors[(i, j)] * yu[(i, j)]).sum();
            (eig.values[j].as_f64(), r.as_f64())
        })
        .collect())
}

/// Symmetrised 0/1 indicator of the edges in `subset` carrying `sign`.
pub fn heldout_indicator<T: Scalar>(g: &SignedBipartiteGraph, subset: &[usize], sign: Sign) -> Result<SparseMatrix<T>> {
    let m = build_sign_matrices::<T>(g, subset)?;
    Ok(symmetrize(match sign {
        Sign::Positive => &m.a_pos,
        Sign::Negative => &m.a_neg,
    }))
}

/// Signal of training operator `Â^source` against test edges of sign `target`.
pub fn signal_for_split(g: &SignedBipartiteGraph, split: &EdgeSplit, source: Sign, target: Sign) -> Result<SpectralSignal> {
    let m = build_sign_matrices::<f64>(g, &split.train)?;
    let a = match source {
        Sign::Positive => &m.a_pos,
        Sign::Negative => &m.a_neg,
    };
    let a_hat = normalize_adjacency(&symmetrize(a));
    let y = heldout_indicator::<f64>(g, &split.test, target)?;
    Ok(SpectralSignal {
        source_sign: source,
        target_sign: target,
        points: spectral_signal(&a_hat, &y)?,
    })
}

impl SpectralSignal {
    /// CSV with header `lambda,rayleigh`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda,rayleigh")?;
        for &(l, r) in &self.points {
            writeln!(w, "{l:.16e},{r:.16e}")?;
        }
        Ok(())
    }
}

/// How well one filter curve matches a signal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveFit {
    pub name: String,
    /// Least-squares amplitude applied to the curve.
    pub gain: f64,
    /// `Σᵢ (gain·g(λᵢ) − rᵢ)²`.
    pub residual: f64,
    /// Signal points whose nearest curve sample was skipped at a pole.
    pub skipped_samples: usize,
}

fn nearest_is_pole(c: &FilterCurve, lambda: f64) -> bool {
    let dist = |xs: &mut dyn Iterator<Item = f64>| xs.map(|x| (x - lambda).abs()).fold(f64::INFINITY, f64::min);
    dist(&mut c.skipped.iter().copied()) < dist(&mut c.samples.iter().map(|s| s.0))
}

/// Fits each curve to the signal with a single scalar gain, reading the
/// curve at the nearest sampled λ.
pub fn fit_report(points: &[(f64, f64)], curves: &[FilterCurve]) -> Result<Vec<CurveFit>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("fit_report needs a non-empty signal".into()));
    }
    curves
        .iter()
        .map(|c| {
            let g: Vec<f64> = points
                .iter()
                .map(|&(l, _)| c.nearest(l).unwrap_or(0.0))
                .collect();
            let gg: f64 = g.iter().map(|v| v * v).sum();
            let gr: f64 = g.iter().zip(points).map(|(v, p)| v * p.1).sum();
            let gain = if gg > 0.0 { gr / gg } else { 0.0 };
            let residual = g.iter().zip(points).map(|(v, p)| (gain * v - p.1).powi(2)).sum();
            let skipped_samples = points.iter().filter(|&&(l, _)| nearest_is_pole(c, l)).count();
            Ok(CurveFit {
                name: c.name().to_string(),
                gain,
                residual,
                skipped_samples,
            })
        })
        .collect()
}
