//! Solvers, filters and features checked against nalgebra's dense
//! symmetric eigendecomposition.

use gegennet::features::{spectral_features, FeatureOptions};
use gegennet::filter::{
    gegenbauer_apply, gegenbauer_scalar, proximity_matrix, proximity_matrix_spectral, GegenbauerParams,
    ProximityKind,
};
use gegennet::graph::{build_sign_matrices, cosine_block_matrix, laplacian, normalize_adjacency, symmetrize};
use gegennet::linalg::{
    dense_eig, largest_eigenpairs, smallest_eigenpairs, top_left_singular_vectors, DenseMatrix, EigenPairs,
    SolverOptions, SparseMatrix,
};
use gegennet::synthetic::uniform_graph;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigenpairs sorted by ascending eigenvalue.
fn oracle_eig(m: &DenseMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(to_na(m));
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.rows(), order.len(), |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix<f64> {
    let mut t = Vec::new();
    for i in 0..n {
        for j in i..n {
            if rng.random::<f64>() < density {
                let v = rng.random_range(-1.0..1.0);
                t.push((i, j, v));
                if i != j {
                    t.push((j, i, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

fn graph_operator(seed: u64, u: usize, v: usize, edges: usize) -> (gegennet::graph::SignedBipartiteGraph, Vec<usize>) {
    let g = uniform_graph(u, v, edges, 0.6, seed).unwrap();
    let all = (0..g.edge_count()).collect();
    (g, all)
}

fn assert_eigenpair_contract(m: &SparseMatrix<f64>, e: &EigenPairs<f64>, tol: f64) {
    let gram = e.vectors.t_matmul(&e.vectors).unwrap();
    for i in 0..e.len() {
        assert!((gram[(i, i)] - 1.0).abs() <= 1e-8);
        for j in 0..i {
            assert!(gram[(i, j)].abs() <= 1e-6);
        }
    }
    for r in e.residuals(|x| m.spmm(x).unwrap()) {
        assert!(r <= tol * 10.0, "residual {r}");
    }
}

#[test]
fn lanczos_matches_dense_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [5, 30, 80, 200] {
        let m = random_symmetric(&mut rng, n, 0.1);
        let (vals, _) = oracle_eig(&m.to_dense());
        let d = 6.min(n);
        let opts = SolverOptions::default();
        let low = smallest_eigenpairs(&m, d, &opts).unwrap();
        assert_eigenpair_contract(&m, &low, opts.tol);
        for i in 0..d {
            assert!((low.values[i] - vals[i]).abs() <= 1e-6, "n={n} i={i}");
        }
        let high = largest_eigenpairs(&m, d, &opts).unwrap();
        assert_eigenpair_contract(&m, &high, opts.tol);
        for i in 0..d {
            assert!((high.values[i] - vals[n - 1 - i]).abs() <= 1e-6);
        }
    }
}

#[test]
fn dense_eig_agrees_with_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [1, 2, 7, 40] {
        let m = random_symmetric(&mut rng, n, 0.5).to_dense();
        let ours = dense_eig(&m).unwrap();
        let (vals, vecs) = oracle_eig(&m);
        for i in 0..n {
            assert!((ours.values[i] - vals[i]).abs() < 1e-10);
        }
        // Compare spectral projectors rather than vectors to stay sign-free.
        let ours_p = to_na(&ours.projector());
        let theirs = &vecs * vecs.transpose();
        assert!((ours_p - theirs).abs().max() < 1e-9);
    }
}

#[test]
fn singular_vectors_are_gram_eigenvectors() {
    for seed in 0..10 {
        let (g, all) = graph_operator(seed, 12 + seed as usize, 15, 60);
        let b = cosine_block_matrix(&build_sign_matrices::<f64>(&g, &all).unwrap().a_all);
        let bd = b.to_dense();
        let (vals, vecs) = oracle_eig(&bd.matmul_t(&bd).unwrap());
        let n = vals.len();
        let d = 4;
        if (vals[n - d] - vals[n - d - 1]).abs() < 1e-6 {
            continue;
        }
        let svd = top_left_singular_vectors(&b, d, &SolverOptions::default()).unwrap();
        for j in 0..d {
            let want = vecs.column(n - 1 - j);
            let got: Vec<f64> = svd.left.column(j);
            let sign = if got.iter().zip(want.iter()).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            let err = got.iter().zip(want.iter()).map(|(a, b)| (sign * a - b).abs()).fold(0.0, f64::max);
            // Individual vectors are only unique when neighbouring values are separated.
            let isolated = (j == 0 || (vals[n - j] - vals[n - 1 - j]).abs() > 1e-6)
                && (vals[n - 1 - j] - vals[n - 2 - j]).abs() > 1e-6;
            if isolated {
                assert!(err <= 1e-5, "seed {seed} column {j}: {err}");
            }
            assert!((svd.values[j].powi(2) - vals[n - 1 - j]).abs() < 1e-8);
        }
    }
}

#[test]
fn gegenbauer_matches_spectral_form_on_rescaled_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [10, 50, 100] {
        let raw = random_symmetric(&mut rng, n, 0.08);
        let radius = oracle_eig(&raw.to_dense()).0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let a = raw.scaled(1.0 / radius);
        let (vals, vecs) = oracle_eig(&a.to_dense());
        let h = DenseMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        let hn = to_na(&h);
        for alpha in [0.5, 1.0, 1.5] {
            let p = GegenbauerParams::with_alpha(alpha).unwrap();
            for k in 0..=8 {
                let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    n,
                    vals.iter().map(|l| gegenbauer_scalar(l, k, &p).unwrap()),
                ));
                let want = &vecs * diag * vecs.transpose() * &hn;
                let got = to_na(&gegenbauer_apply(&a, &h, k, &p).unwrap());
                assert!((got - want).abs().max() <= 1e-8, "n={n} alpha={alpha} k={k}");
            }
        }
    }
}

#[test]
fn proximity_series_matches_spectral_form() {
    for seed in 0..5 {
        let (g, all) = graph_operator(seed, 14, 16, 70);
        let raw = symmetrize(&build_sign_matrices::<f64>(&g, &all).unwrap().a_all);
        let a = normalize_adjacency(&raw);
        let cn = proximity_matrix(ProximityKind::CommonNeighbors, &raw).unwrap();
        let direct = raw.to_dense().matmul(&raw.to_dense()).unwrap();
        assert_eq!(cn.max_abs_diff(&direct).unwrap(), 0.0);
        for kind in [
            ProximityKind::KHop { k: 3 },
            ProximityKind::Ppr { alpha: 0.9, k: 20 },
            ProximityKind::Hkpr { alpha: 2.0, k: 20 },
        ] {
            let series = proximity_matrix(kind, &a).unwrap();
            let spectral = proximity_matrix_spectral(kind, &a).unwrap();
            assert!(series.sub(&spectral).unwrap().frobenius_norm() < 1e-6);
        }
    }
}

#[test]
fn laplacian_features_span_bottom_eigenspace() {
    for seed in 0..6 {
        let (g, all) = graph_operator(seed, 20, 25, 140);
        let d = 5;
        let opts = FeatureOptions { d, ..FeatureOptions::default() };
        let f = spectral_features::<f64>(&g, &all, &opts).unwrap();
        let l = laplacian(&symmetrize(&build_sign_matrices::<f64>(&g, &all).unwrap().a_all));
        let (vals, vecs) = oracle_eig(&l.to_dense());
        if (vals[d] - vals[d - 1]).abs() < 1e-6 {
            continue;
        }
        let bottom = vecs.columns(0, d).into_owned();
        let want = &bottom * bottom.transpose();
        let phi = to_na(&f.phi);
        let got = &phi * phi.transpose();
        assert!((got - want).norm() <= 1e-5, "seed {seed}");
    }
}

#[test]
fn features_are_bit_reproducible() {
    let (g, all) = graph_operator(9, 30, 40, 300);
    let opts = FeatureOptions { d: 8, ..FeatureOptions::default() };
    let a = spectral_features::<f64>(&g, &all, &opts).unwrap();
    let b = spectral_features::<f64>(&g, &all, &opts).unwrap();
    let bits = |m: &DenseMatrix<f64>| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.x), bits(&b.x));
}

#[test]
fn feature_bases_beat_random_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..3 {
        let (g, all) = graph_operator(seed, 15, 18, 90);
        let d = 4;
        let opts = FeatureOptions { d, ..FeatureOptions::default() };
        let f = spectral_features::<f64>(&g, &all, &opts).unwrap();
        let m = build_sign_matrices::<f64>(&g, &all).unwrap();
        let l = to_na(&laplacian(&symmetrize(&m.a_all)).to_dense());
        let b = to_na(&cosine_block_matrix(&m.a_all).to_dense());
        let bbt = &b * b.transpose();
        let phi = to_na(&f.phi);
        let psi = to_na(&f.psi);
        let t_phi = (phi.transpose() * &l * &phi).trace();
        let t_psi = (psi.transpose() * &bbt * &psi).trace();
        let n = l.nrows();
        for _ in 0..100 {
            let q = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)).qr().q();
            assert!(t_phi <= (q.transpose() * &l * &q).trace() + 1e-10);
            assert!(t_psi >= (q.transpose() * &bbt * &q).trace() - 1e-10);
        }
    }
}

#[test]
fn repeated_eigenvalues_are_all_found() {
    let base = uniform_graph(30, 40, 200, 0.5, 3).unwrap();
    let copies = 8;
    let edges = (0..copies)
        .flat_map(|c| {
            base.edges().iter().map(move |e| gegennet::graph::SignedEdge { u: e.u + 30 * c, v: e.v + 40 * c, sign: e.sign })
        })
        .collect();
    let g = gegennet::graph::SignedBipartiteGraph::new(30 * copies, 40 * copies, edges).unwrap();
    let all: Vec<usize> = (0..g.edge_count()).collect();
    let m = build_sign_matrices::<f64>(&g, &all).unwrap();
    let l = laplacian(&symmetrize(&m.a_all));
    let (vals, _) = oracle_eig(&l.to_dense());
    let low = smallest_eigenpairs(&l, 12, &SolverOptions::default()).unwrap();
    for i in 0..12 {
        assert!((low.values[i] - vals[i]).abs() < 1e-6, "{i}: {} vs {}", low.values[i], vals[i]);
    }
    let b = cosine_block_matrix(&m.a_all);
    let bd = b.to_dense();
    let (gram_vals, _) = oracle_eig(&bd.matmul_t(&bd).unwrap());
    let svd = top_left_singular_vectors(&b, 12, &SolverOptions::default()).unwrap();
    let n = gram_vals.len();
    for i in 0..12 {
        assert!((svd.values[i].powi(2) - gram_vals[n - 1 - i]).abs() < 1e-6);
    }
}

#[test]
fn svd_left_vectors_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t: Vec<(usize, usize, f64)> = (0..20)
        .flat_map(|i| (0..15).map(move |j| (i, j)))
        .filter(|_| rng.random::<f64>() < 0.3)
        .map(|(i, j)| (i, j, 1.0 + (i * 15 + j) as f64 / 300.0))
        .collect();
    let b = SparseMatrix::from_triplets(20, 15, t).unwrap();
    let s = top_left_singular_vectors(&b, 5, &SolverOptions::default()).unwrap();
    let gram = s.left.t_matmul(&s.left).unwrap();
    assert!(gram.max_abs_diff(&DenseMatrix::identity(5)).unwrap() <= 1e-6);
    assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn rank_two_reconstruction() {
    let x = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
    let y = [2.0, 1.0, -1.0, 0.5];
    let p = [0.0, 1.0, 1.0, -1.0, 2.0, 0.5];
    let q = [1.0, -1.0, 0.0, 2.0];
    let dense = DenseMatrix::from_fn(6, 4, |i, j| x[i] * y[j] + p[i] * q[j]);
    let b = SparseMatrix::from_dense(&dense);
    let s = top_left_singular_vectors(&b, 2, &SolverOptions::default()).unwrap();
    // With right vectors vᵢ = Bᵀuᵢ / σᵢ, Σ σᵢ uᵢ vᵢᵀ = U Uᵀ B.
    let u = to_na(&s.left);
    let bn = to_na(&dense);
    assert!((&u * u.transpose() * &bn - &bn).norm() <= 1e-6);
}
