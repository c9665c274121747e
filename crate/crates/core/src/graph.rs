//! Signed bipartite graphs: ingestion, deterministic edge splits, and the
//! matrices derived from an edge set.
//!
//! Node ordering convention used by every block matrix in the crate: the
//! `u_count` nodes of the first partition come first, followed by the
//! `v_count` nodes of the second partition.

use std::collections::HashMap;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// `+1` or `−1`.
    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    /// Binary training label: positive maps to 1, negative to 0.
    pub fn label(self) -> u8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedEdge {
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
}

/// Two disjoint node sets with signed edges running only between them.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedBipartiteGraph {
    u_count: usize,
    v_count: usize,
    edges: Vec<SignedEdge>,
    u_labels: Option<Vec<String>>,
    v_labels: Option<Vec<String>>,
}

impl SignedBipartiteGraph {
    /// Validates index bounds and the one-sign-per-pair rule.
    pub fn new(u_count: usize, v_count: usize, edges: Vec<SignedEdge>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.u >= u_count || e.v >= v_count {
                return Err(Error::IndexOutOfRange(format!(
                    "edge {k} = ({}, {}) with partitions of size {u_count} and {v_count}",
                    e.u, e.v
                )));
            }
            if seen.insert((e.u, e.v), k).is_some() {
                return Err(Error::DuplicateEdge {
                    line: k + 1,
                    u: e.u.to_string(),
                    v: e.v.to_string(),
                });
            }
        }
        Ok(Self {
            u_count,
            v_count,
            edges,
            u_labels: None,
            v_labels: None,
        })
    }

    pub fn with_labels(mut self, u_labels: Vec<String>, v_labels: Vec<String>) -> Result<Self> {
        if u_labels.len() != self.u_count || v_labels.len() != self.v_count {
            return Err(Error::shape(
                "SignedBipartiteGraph::with_labels",
                format!("{} and {} labels", self.u_count, self.v_count),
                format!("{} and {}", u_labels.len(), v_labels.len()),
            ));
        }
        self.u_labels = Some(u_labels);
        self.v_labels = Some(v_labels);
        Ok(self)
    }

    pub fn u_count(&self) -> usize {
        self.u_count
    }

    pub fn v_count(&self) -> usize {
        self.v_count
    }

    pub fn node_count(&self) -> usize {
        self.u_count + self.v_count
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positive_count(&self) -> usize {
        self.edges.iter().filter(|e| e.sign == Sign::Positive).count()
    }

    pub fn negative_count(&self) -> usize {
        self.edge_count() - self.positive_count()
    }

    pub fn u_labels(&self) -> Option<&[String]> {
        self.u_labels.as_deref()
    }

    pub fn v_labels(&self) -> Option<&[String]> {
        self.v_labels.as_deref()
    }

    /// Row index of a second-partition node in the joint ordering.
    pub fn v_offset(&self, v: usize) -> usize {
        self.u_count + v
    }
}

/// How the third column of an edge-list line becomes a sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignMapping {
    /// Accepts `1`, `+1` and `-1`.
    Binary,
    /// Numeric ratings: strictly above `midpoint` is positive, otherwise negative.
    Threshold { midpoint: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeListFormat {
    pub sign_mapping: SignMapping,
    pub comment: char,
}

impl Default for EdgeListFormat {
    fn default() -> Self {
        Self {
            sign_mapping: SignMapping::Binary,
            comment: '#',
        }
    }
}

impl EdgeListFormat {
    pub fn threshold(midpoint: f64) -> Self {
        Self {
            sign_mapping: SignMapping::Threshold { midpoint },
            ..Self::default()
        }
    }

    fn sign(&self, token: &str, line: usize) -> Result<Sign> {
        let invalid = || Error::InvalidSign {
            line,
            token: token.to_string(),
        };
        match self.sign_mapping {
            SignMapping::Binary => match token {
                "1" | "+1" => Ok(Sign::Positive),
                "-1" => Ok(Sign::Negative),
                _ => Err(invalid()),
            },
            SignMapping::Threshold { midpoint } => {
                let r: f64 = token.parse().map_err(|_| invalid())?;
                if !r.is_finite() {
                    return Err(invalid());
                }
                Ok(if r > midpoint { Sign::Positive } else { Sign::Negative })
            }
        }
    }
}

/// Parses whitespace-separated `u v sign` lines. Identifiers are re-indexed
/// densely per partition in first-seen order.
pub fn parse_edge_list<R: BufRead>(reader: R, format: &EdgeListFormat) -> Result<SignedBipartiteGraph> {
    let mut u_index: HashMap<String, usize> = HashMap::new();
    let mut v_index: HashMap<String, usize> = HashMap::new();
    let mut u_labels = Vec::new();
    let mut v_labels = Vec::new();
    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();

    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let content = match line.find(format.comment) {
            Some(p) => &line[..p],
            None => &line[..],
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 fields (u, v, sign), found {}", fields.len()),
            });
        }
        let sign = format.sign(fields[2], line_no)?;
        let u = *u_index.entry(fields[0].to_string()).or_insert_with(|| {
            u_labels.push(fields[0].to_string());
            u_labels.len() - 1
        });
        let v = *v_index.entry(fields[1].to_string()).or_insert_with(|| {
            v_labels.push(fields[1].to_string());
            v_labels.len() - 1
        });
        if seen.insert((u, v), ()).is_some() {
            return Err(Error::DuplicateEdge {
                line: line_no,
                u: fields[0].to_string(),
                v: fields[1].to_string(),
            });
        }
        edges.push(SignedEdge { u, v, sign });
    }
    SignedBipartiteGraph::new(u_labels.len(), v_labels.len(), edges)?.with_labels(u_labels, v_labels)
}

pub fn parse_edge_list_str(text: &str, format: &EdgeListFormat) -> Result<SignedBipartiteGraph> {
    parse_edge_list(text.as_bytes(), format)
}

/// A reproducible train/validation/test partition of edge indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl EdgeSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the split against a graph: indices in range and the three sets
    /// partitioning every edge exactly once.
    pub fn validate(&self, edge_count: usize) -> Result<()> {
        let mut hits = vec![0u8; edge_count];
        for &k in self.train.iter().chain(&self.validation).chain(&self.test) {
            if k >= edge_count {
                return Err(Error::IndexOutOfRange(format!(
                    "split references edge {k} of {edge_count}"
                )));
            }
            hits[k] += 1;
        }
        if hits.iter().any(|&h| h != 1) {
            return Err(Error::Format {
                what: "split manifest",
                message: "sets do not partition the edge list".into(),
            });
        }
        Ok(())
    }
}

/// Shuffles edge indices with a seeded generator and cuts them into
/// `floor(r_train·m)`, `floor(r_val·m)` and the remainder.
pub fn split_edges(g: &SignedBipartiteGraph, ratios: [f64; 3], seed: u64) -> Result<EdgeSplit> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidRatios(ratios));
    }
    let m = g.edge_count();
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = ((ratios[0] * m as f64).floor() as usize).min(m);
    let n_val = ((ratios[1] * m as f64).floor() as usize).min(m - n_train);
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(EdgeSplit {
        seed,
        ratios,
        train: order,
        validation,
        test,
    })
}

/// Bi-adjacency indicators of one edge subset.
#[derive(Clone, Debug, PartialEq)]
pub struct SignMatrices<T> {
    pub a_pos: SparseMatrix<T>,
    pub a_neg: SparseMatrix<T>,
    pub a_all: SparseMatrix<T>,
}

pub fn build_sign_matrices<T: Scalar>(g: &SignedBipartiteGraph, subset: &[usize]) -> Result<SignMatrices<T>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &k in subset {
        let e = g.edges.get(k).ok_or_else(|| {
            Error::IndexOutOfRange(format!("edge {k} of {}", g.edge_count()))
        })?;
        match e.sign {
            Sign::Positive => pos.push((e.u, e.v, T::one())),
            Sign::Negative => neg.push((e.u, e.v, T::one())),
        }
    }
    let (p, q) = (g.u_count, g.v_count);
    let a_pos = SparseMatrix::from_triplets(p, q, pos.iter().copied())?;
    let a_neg = SparseMatrix::from_triplets(p, q, neg.iter().copied())?;
    let a_all = SparseMatrix::from_triplets(p, q, pos.into_iter().chain(neg))?;
    Ok(SignMatrices { a_pos, a_neg, a_all })
}

/// Places `b` (p×q) in the top-right block and `bᵀ` in the bottom-left block
/// of a (p+q)×(p+q) matrix.
pub fn symmetrize<T: Scalar>(b: &SparseMatrix<T>) -> SparseMatrix<T> {
    let (p, q) = b.shape();
    let triplets = b
        .iter()
        .flat_map(|(i, j, v)| [(i, p + j, v), (p + j, i, v)]);
    SparseMatrix::from_triplets(p + q, p + q, triplets).expect("block indices are in range")
}

fn inverse_sqrt_degrees<T: Scalar>(s: &SparseMatrix<T>) -> Vec<T> {
    s.row_sums()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d.sqrt() } else { T::zero() })
        .collect()
}

/// `D^{-1/2} S D^{-1/2}` with the row-sum degrees of `s`; zero-degree nodes
/// get a zero scale factor.
pub fn normalize_adjacency<T: Scalar>(s: &SparseMatrix<T>) -> SparseMatrix<T> {
    let scale = inverse_sqrt_degrees(s);
    let out = s.scale_rows_cols(&scale, &scale).expect("square matrix");
    // Scaling is symmetric in exact arithmetic; copy the upper triangle so the
    // result is bit-exactly symmetric as well.
    let n = out.rows();
    SparseMatrix::from_triplets(
        n,
        out.cols(),
        out.iter()
            .filter(|&(i, j, _)| i <= j)
            .flat_map(|(i, j, v)| {
                if i == j {
                    vec![(i, j, v)]
                } else {
                    vec![(i, j, v), (j, i, v)]
                }
            }),
    )
    .expect("indices unchanged")
}

/// `D − S` with `D` the diagonal of row sums.
pub fn laplacian<T: Scalar>(s: &SparseMatrix<T>) -> SparseMatrix<T> {
    let deg = s.row_sums();
    let n = s.rows();
    SparseMatrix::from_triplets(
        n,
        s.cols(),
        s.iter()
            .map(|(i, j, v)| (i, j, -v))
            .chain(deg.into_iter().enumerate().map(|(i, d)| (i, i, d))),
    )
    .expect("square matrix")
}

/// Signed Laplacian `D̄ − (S⁺ − S⁻)` where `D̄` sums absolute weights; used by
/// the optional signed variant of the inter-partition features.
pub fn signed_laplacian<T: Scalar>(s_pos: &SparseMatrix<T>, s_neg: &SparseMatrix<T>) -> Result<SparseMatrix<T>> {
    let signed = s_pos.linear_combination(T::one(), s_neg, -T::one())?;
    let abs_deg: Vec<T> = s_pos
        .row_sums()
        .into_iter()
        .zip(s_neg.row_sums())
        .map(|(a, b)| a + b)
        .collect();
    let n = signed.rows();
    SparseMatrix::from_triplets(
        n,
        n,
        signed
            .iter()
            .map(|(i, j, v)| (i, j, -v))
            .chain(abs_deg.into_iter().enumerate().map(|(i, d)| (i, i, d))),
    )
}

fn l2_normalized_rows<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<T> {
    let inv: Vec<T> = (0..a.rows())
        .map(|i| {
            let n = a.row(i).1.iter().map(|&v| v * v).sum::<T>().sqrt();
            if n > T::zero() {
                T::one() / n
            } else {
                T::zero()
            }
        })
        .collect();
    a.scale_rows_cols(&inv, &vec![T::one(); a.cols()])
        .expect("shapes match")
}

/// Row-normalised block `B^(r)` (p×q).
pub fn row_normalized<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<T> {
    l2_normalized_rows(a)
}

/// Column-normalised block `B^(c)` (p×q).
pub fn column_normalized<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<T> {
    l2_normalized_rows(&a.transpose()).transpose()
}

/// Block matrix with `B^(r)` top-right and `(B^(c))ᵀ` bottom-left, so that the
/// diagonal blocks of `B Bᵀ` are the row- and column-cosine Gram matrices.
pub fn cosine_block_matrix<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<T> {
    let (p, q) = a.shape();
    let br = row_normalized(a);
    let bc = column_normalized(a);
    let triplets = br
        .iter()
        .map(|(i, j, v)| (i, p + j, v))
        .chain(bc.iter().map(|(i, j, v)| (p + j, i, v)));
    SparseMatrix::from_triplets(p + q, p + q, triplets).expect("block indices are in range")
}
