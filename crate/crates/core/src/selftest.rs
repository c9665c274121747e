//! Oracle checks on small seeded graphs, run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::features::{intra_partition_features, spectral_features, FeatureOptions};
use crate::filter::{
    gegenbauer_apply, proximity_matrix, proximity_matrix_spectral, GegenbauerParams, ProximityKind,
};
use crate::graph::{
    build_sign_matrices, cosine_block_matrix, laplacian, normalize_adjacency, symmetrize, SignedBipartiteGraph,
};
use crate::linalg::{dense_eig, DenseMatrix, SolverOptions, SparseMatrix};
use crate::metrics::evaluate;
use crate::graph::Sign;
use crate::model::{forward, linearized_forward, loss_and_gradients, Batch, ModelConfig, ModelParams};
use crate::synthetic::uniform_graph;

/// Outcome of one oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Largest discrepancy observed over all trials.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        Self { name, worst, tolerance, passed: worst <= tolerance }
    }
}

fn small_graph(rng: &mut ChaCha8Rng, max_side: usize) -> Result<SignedBipartiteGraph> {
    let u = rng.random_range(3..=max_side);
    let v = rng.random_range(3..=max_side);
    let edges = rng.random_range(u.max(v)..=u * v);
    uniform_graph(u, v, edges, 0.6, rng.random())
}

fn full_operator(g: &SignedBipartiteGraph) -> Result<SparseMatrix<f64>> {
    let all: Vec<usize> = (0..g.edge_count()).collect();
    Ok(normalize_adjacency(&symmetrize(&build_sign_matrices::<f64>(g, &all)?.a_all)))
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn orthonormal_basis(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DenseMatrix<f64> {
    let mut q = gaussian(rng, n, d);
    for j in 0..d {
        let mut col = q.column(j);
        for _ in 0..2 {
            for p in 0..j {
                let prev = q.column(p);
                let c: f64 = prev.iter().zip(&col).map(|(a, b)| a * b).sum();
                col.iter_mut().zip(&prev).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        col.iter_mut().for_each(|x| *x /= norm);
        q.set_column(j, &col).expect("column length matches");
    }
    q
}

fn spectral_apply(a: &SparseMatrix<f64>, h: &DenseMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DenseMatrix<f64>> {
    let eig = dense_eig(&a.to_dense())?;
    let scaled = DenseMatrix::from_fn(a.rows(), eig.len(), |i, j| eig.vectors[(i, j)] * f(eig.values[j]));
    scaled.matmul(&eig.vectors.t_matmul(h)?)
}

fn legendre(x: f64, k: usize) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return p0;
    }
    for n in 1..k {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn gegenbauer_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let g = small_graph(rng, 12)?;
        let a = full_operator(&g)?;
        let h = gaussian(rng, a.rows(), 3);
        for alpha in [0.5, 1.0, 1.5] {
            let params = GegenbauerParams::with_alpha(alpha)?;
            for k in 0..=8 {
                let fast = gegenbauer_apply(&a, &h, k, &params)?;
                let slow = spectral_apply(&a, &h, |l| crate::filter::gegenbauer_scalar(&l, k, &params).unwrap_or(f64::NAN))?;
                worst = worst.max(fast.max_abs_diff(&slow)?);
            }
        }
    }
    Ok(Check::new("gegenbauer matrix-free vs spectral", worst, 1e-8))
}

fn legendre_check() -> Result<Check> {
    let params = GegenbauerParams::with_alpha(0.5)?;
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let x = -1.0 + 0.02 * i as f64;
        for k in 0..=10 {
            worst = worst.max((crate::filter::gegenbauer_scalar(&x, k, &params)? - legendre(x, k)).abs());
        }
    }
    Ok(Check::new("alpha = 1/2 reduces to Legendre", worst, 1e-12))
}

fn proximity_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let g = small_graph(rng, 15)?;
        let all: Vec<usize> = (0..g.edge_count()).collect();
        let raw = symmetrize(&build_sign_matrices::<f64>(&g, &all)?.a_all);
        let a = normalize_adjacency(&raw);
        let cases = [
            (ProximityKind::CommonNeighbors, &raw),
            (ProximityKind::Ppr { alpha: 0.9, k: 20 }, &a),
            (ProximityKind::Hkpr { alpha: 2.0, k: 20 }, &a),
        ];
        for (kind, op) in cases {
            let series = proximity_matrix(kind, op)?;
            let spectral = proximity_matrix_spectral(kind, op)?;
            worst = worst.max(series.sub(&spectral)?.frobenius_norm());
        }
    }
    Ok(Check::new("proximity series vs spectral form", worst, 1e-6))
}

fn projector(v: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    v.matmul_t(v)
}

fn singular_subspace_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let g = small_graph(rng, 12)?;
        let all: Vec<usize> = (0..g.edge_count()).collect();
        let b = cosine_block_matrix(&build_sign_matrices::<f64>(&g, &all)?.a_all);
        let eig = dense_eig(&b.to_dense().matmul_t(&b.to_dense())?)?;
        let n = b.rows();
        let d = 2;
        // Skip draws whose d-th and (d+1)-th eigenvalues coincide: the
        // subspace is then not unique.
        if (eig.values[n - d] - eig.values[n - d - 1]).abs() < 1e-6 {
            continue;
        }
        let top = eig.vectors.column_block(n - d, n);
        let svd = intra_partition_features(&b, d, &SolverOptions::default())?;
        worst = worst.max(projector(&svd)?.max_abs_diff(&projector(&top)?)?);
    }
    Ok(Check::new("singular vectors span top eigenspace of B Bt", worst, 1e-5))
}

fn ky_fan_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let g = small_graph(rng, 12)?;
        let all: Vec<usize> = (0..g.edge_count()).collect();
        let d = 3;
        let opts = FeatureOptions { d, ..FeatureOptions::default() };
        let f = spectral_features::<f64>(&g, &all, &opts)?;
        let m = build_sign_matrices::<f64>(&g, &all)?;
        let l = laplacian(&symmetrize(&m.a_all)).to_dense();
        let b = cosine_block_matrix(&m.a_all).to_dense();
        let bbt = b.matmul_t(&b)?;
        let trace = |m: &DenseMatrix<f64>, q: &DenseMatrix<f64>| -> Result<f64> { Ok(q.t_matmul(&m.matmul(q)?)?.trace()) };
        let phi_trace = trace(&l, &f.phi)?;
        let psi_trace = trace(&bbt, &f.psi)?;
        for _ in 0..20 {
            let q = orthonormal_basis(rng, l.rows(), d);
            worst = worst.max(phi_trace - trace(&l, &q)?);
            worst = worst.max(trace(&bbt, &q)? - psi_trace);
        }
    }
    Ok(Check::new("feature bases are trace optimal", worst.max(0.0), 1e-8))
}

fn tiny_config(layers: usize, embed: usize, d: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        layers,
        embed_dim: embed,
        spectral_dim: d,
        dropout: 0.0,
        seed,
        ..ModelConfig::default()
    }
}

fn linearization_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let g = small_graph(rng, 8)?;
        let all: Vec<usize> = (0..g.edge_count()).collect();
        let m = build_sign_matrices::<f64>(&g, &all)?;
        let a_pos = normalize_adjacency(&symmetrize(&m.a_pos));
        let a_neg = normalize_adjacency(&symmetrize(&m.a_neg));
        let cfg = tiny_config(1 + t % 2, 4, 3, rng.random());
        let mut params = ModelParams::<f64>::init(&cfg);
        params.set_slopes(1.0);
        let x = gaussian(rng, g.node_count(), 3);
        let (z, _) = forward(&params, &x, &a_pos, &a_neg, &cfg, None)?;
        let (lin, _) = linearized_forward(&params, &x, &a_pos, &a_neg, &cfg)?;
        worst = worst.max(z.sub(&lin)?.frobenius_norm());
    }
    Ok(Check::new("linear network equals its path expansion", worst, 1e-6))
}

fn gradient_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let g = small_graph(rng, 8)?;
    let all: Vec<usize> = (0..g.edge_count()).collect();
    let m = build_sign_matrices::<f64>(&g, &all)?;
    let a_pos = normalize_adjacency(&symmetrize(&m.a_pos));
    let a_neg = normalize_adjacency(&symmetrize(&m.a_neg));
    let cfg = tiny_config(2, 4, 3, rng.random());
    let mut params = ModelParams::<f64>::init(&cfg);
    params.set_slopes(0.3);
    let x = gaussian(rng, g.node_count(), 3);
    let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let labels: Vec<f64> = g.edges().iter().map(|e| f64::from(e.sign.label())).collect();
    let batch = Batch { x: &x, a_pos: &a_pos, a_neg: &a_neg, u_count: g.u_count(), pairs: &pairs, labels: &labels };
    let (_, grads) = loss_and_gradients(&params, &batch, &cfg, None)?;
    let analytic = grads.to_flat();
    let base = params.to_flat();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for (i, &g_i) in analytic.iter().enumerate() {
        let mut shifted = base.clone();
        shifted[i] = base[i] + h;
        probe.set_flat(&shifted)?;
        let (up, _) = loss_and_gradients(&probe, &batch, &cfg, None)?;
        shifted[i] = base[i] - h;
        probe.set_flat(&shifted)?;
        let (down, _) = loss_and_gradients(&probe, &batch, &cfg, None)?;
        let numeric = (up - down) / (2.0 * h);
        let scale = numeric.abs().max(g_i.abs()).max(1e-6);
        worst = worst.max((numeric - g_i).abs() / scale);
    }
    Ok(Check::new("backward matches central differences", worst, 1e-4))
}

fn degenerate_f1_check() -> Result<Check> {
    let mut worst = 0.0f64;
    for (n_pos, n, expected) in [(8058, 10_000, 0.4463), (9798, 10_000, 0.4949)] {
        let signs: Vec<Sign> = (0..n).map(|i| if i < n_pos { Sign::Positive } else { Sign::Negative }).collect();
        let m = evaluate(&vec![0.9; n], &signs)?;
        worst = worst.max((m.macro_f1 - expected).abs());
    }
    Ok(Check::new("constant predictor macro-F1", worst, 1e-4))
}

/// Runs every check with trial graphs drawn from `seed`.
pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        gegenbauer_check(&mut rng, 5)?,
        legendre_check()?,
        proximity_check(&mut rng, 5)?,
        singular_subspace_check(&mut rng, 5)?,
        ky_fan_check(&mut rng, 5)?,
        linearization_check(&mut rng, 6)?,
        gradient_check(&mut rng)?,
        degenerate_f1_check()?,
    ])
}
