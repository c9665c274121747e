//! Seeded random signed bipartite graphs for tests, self-checks and demos.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Sign, SignedBipartiteGraph, SignedEdge};

/// `edges` distinct pairs drawn uniformly, each positive with probability
/// `positive_ratio`.
pub fn uniform_graph(u_count: usize, v_count: usize, edges: usize, positive_ratio: f64, seed: u64) -> Result<SignedBipartiteGraph> {
    let total = u_count * v_count;
    if edges > total {
        return Err(Error::InvalidParameter(format!(
            "{edges} edges requested but only {total} pairs exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, total, edges).into_vec();
    chosen.sort_unstable();
    let list = chosen
        .into_iter()
        .map(|k| SignedEdge {
            u: k / v_count,
            v: k % v_count,
            sign: if rng.random::<f64>() < positive_ratio { Sign::Positive } else { Sign::Negative },
        })
        .collect();
    SignedBipartiteGraph::new(u_count, v_count, list)
}

/// Settings for [`planted_graph`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantedGraph {
    pub u_count: usize,
    pub v_count: usize,
    pub edges: usize,
    /// Dimension of the hidden factors.
    pub rank: usize,
    /// Standard deviation of the per-node offsets `b_u`, `c_v`.
    pub bias: f64,
    /// Standard deviation of the Gaussian noise added before taking the sign.
    pub noise: f64,
    pub seed: u64,
}

/// Signs from hidden factors: edge `(u, v)` is positive iff
/// `b_u + c_v + p_u · q_v + noise·ε > 0` with Gaussian `b`, `c`, `p`, `q`, `ε`. Every node of
/// both partitions receives at least one edge when `edges` allows it.
pub fn planted_graph(cfg: &PlantedGraph) -> Result<SignedBipartiteGraph> {
    let PlantedGraph { u_count, v_count, edges, rank, bias, noise, seed } = *cfg;
    let total = u_count * v_count;
    if edges > total || rank == 0 {
        return Err(Error::InvalidParameter(format!(
            "planted graph needs 0 < rank and edges <= {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || rng.sample::<f64, _>(StandardNormal);
    let p: Vec<Vec<f64>> = (0..u_count).map(|_| (0..rank).map(|_| gauss()).collect()).collect();
    let q: Vec<Vec<f64>> = (0..v_count).map(|_| (0..rank).map(|_| gauss()).collect()).collect();
    let b: Vec<f64> = (0..u_count).map(|_| bias * gauss()).collect();
    let c: Vec<f64> = (0..v_count).map(|_| bias * gauss()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut pairs: HashSet<(usize, usize)> = HashSet::with_capacity(edges);
    let mut ordered = Vec::with_capacity(edges);
    let cover = u_count.max(v_count);
    if edges >= cover {
        for k in 0..cover {
            let pair = (k % u_count, k % v_count);
            if pairs.insert(pair) {
                ordered.push(pair);
            }
        }
    }
    while ordered.len() < edges {
        let pair = (rng.random_range(0..u_count), rng.random_range(0..v_count));
        if pairs.insert(pair) {
            ordered.push(pair);
        }
    }
    let list = ordered
        .into_iter()
        .map(|(u, v)| {
            let s: f64 = b[u] + c[v] + p[u].iter().zip(&q[v]).map(|(x, y)| x * y).sum::<f64>()
                + noise * rng.sample::<f64, _>(StandardNormal);
            SignedEdge {
                u,
                v,
                sign: if s > 0.0 { Sign::Positive } else { Sign::Negative },
            }
        })
        .collect();
    SignedBipartiteGraph::new(u_count, v_count, list)
}
