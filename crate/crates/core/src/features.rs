//! Structural node features.
//!
//! `Φ` holds the bottom eigenvectors of the Laplacian of the whole block
//! adjacency and captures links across the two partitions. `Ψ` holds the top
//! left singular vectors of the cosine block matrix and captures similarity
//! inside each partition. The model input is the blend `X = μΦ + (1−μ)Ψ`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, ReadBytesExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{build_sign_matrices, cosine_block_matrix, laplacian, signed_laplacian, symmetrize, SignedBipartiteGraph};
use crate::linalg::{smallest_eigenpairs, top_left_singular_vectors, DenseMatrix, SolverOptions, SparseMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFeatures<T> {
    pub phi: DenseMatrix<T>,
    pub psi: DenseMatrix<T>,
    pub x: DenseMatrix<T>,
    pub mu: T,
    pub d: usize,
}

/// Bottom-`d` eigenvectors of a Laplacian, columns ordered by ascending eigenvalue.
pub fn inter_partition_features<T: Scalar>(
    l: &SparseMatrix<T>,
    d: usize,
    opts: &SolverOptions,
) -> Result<DenseMatrix<T>> {
    Ok(smallest_eigenpairs(l, d, opts)?.vectors)
}

/// Top-`d` left singular vectors of the cosine block matrix.
pub fn intra_partition_features<T: Scalar>(
    b: &SparseMatrix<T>,
    d: usize,
    opts: &SolverOptions,
) -> Result<DenseMatrix<T>> {
    Ok(top_left_singular_vectors(b, d, opts)?.left)
}

pub fn combine_features<T: Scalar>(phi: DenseMatrix<T>, psi: DenseMatrix<T>, mu: T) -> Result<SpectralFeatures<T>> {
    if phi.shape() != psi.shape() {
        return Err(Error::shape(
            "combine_features",
            format!("{:?}", phi.shape()),
            format!("{:?}", psi.shape()),
        ));
    }
    if !(mu >= T::zero() && mu <= T::one()) {
        return Err(Error::InvalidParameter(format!("mu must lie in [0, 1], got {mu}")));
    }
    let x = if mu == T::one() {
        phi.clone()
    } else if mu == T::zero() {
        psi.clone()
    } else {
        let w = T::one() - mu;
        let data = phi
            .as_slice()
            .iter()
            .zip(psi.as_slice())
            .map(|(&a, &b)| mu * a + w * b)
            .collect();
        DenseMatrix::from_vec(phi.rows(), phi.cols(), data)?
    };
    let d = phi.cols();
    Ok(SpectralFeatures { phi, psi, x, mu, d })
}

/// Settings for computing features from a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureOptions {
    pub d: usize,
    pub mu: f64,
    /// Use `D̄ − (Ã⁺ − Ã⁻)` instead of the unsigned Laplacian for `Φ`.
    pub signed_laplacian: bool,
    pub solver: SolverOptions,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            d: 32,
            mu: 0.3,
            signed_laplacian: false,
            solver: SolverOptions::default(),
        }
    }
}

/// Features from the edges listed in `subset` (normally the training split).
pub fn spectral_features<T: Scalar>(
    g: &SignedBipartiteGraph,
    subset: &[usize],
    opts: &FeatureOptions,
) -> Result<SpectralFeatures<T>> {
    let m = build_sign_matrices::<T>(g, subset)?;
    let l = if opts.signed_laplacian {
        signed_laplacian(&symmetrize(&m.a_pos), &symmetrize(&m.a_neg))?
    } else {
        laplacian(&symmetrize(&m.a_all))
    };
    let phi = inter_partition_features(&l, opts.d, &opts.solver)?;
    let psi = intra_partition_features(&cosine_block_matrix(&m.a_all), opts.d, &opts.solver)?;
    combine_features(phi, psi, T::of(opts.mu))
}

/// Gaussian features scaled to unit-norm columns on average, used in place of
/// the spectral ones for ablations.
pub fn random_features<T: Scalar>(n: usize, d: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = if n > 0 { 1.0 / (n as f64).sqrt() } else { 0.0 };
    DenseMatrix::from_fn(n, d, |_, _| T::of(rng.sample::<f64, _>(StandardNormal) * scale))
}

const CACHE_MAGIC: f64 = 4_702_111_234_474_983_745.0;
const CACHE_VERSION: f64 = 1.0;

/// Hex SHA-256 identifying a feature computation.
pub fn cache_key(data: &[u8], split_manifest: &[u8], d: usize, signed_laplacian: bool) -> String {
    let mut h = Sha256::new();
    h.update(Sha256::digest(data));
    h.update(Sha256::digest(split_manifest));
    h.update((d as u64).to_le_bytes());
    h.update([signed_laplacian as u8]);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialises `[Φ | Ψ]` row-major after an eight-value header.
pub fn write_cache<W: Write>(mut w: W, f: &SpectralFeatures<f64>) -> Result<()> {
    let header = [
        CACHE_MAGIC,
        CACHE_VERSION,
        f.phi.rows() as f64,
        (2 * f.d) as f64,
        f.d as f64,
        f.mu,
        0.0,
        0.0,
    ];
    let mut buf = vec![0u8; 8 * (header.len() + 2 * f.phi.rows() * f.d)];
    let mut values = Vec::with_capacity(buf.len() / 8);
    values.extend_from_slice(&header);
    for i in 0..f.phi.rows() {
        values.extend_from_slice(f.phi.row(i));
        values.extend_from_slice(f.psi.row(i));
    }
    LittleEndian::write_f64_into(&values, &mut buf);
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_cache<R: Read>(mut r: R) -> Result<SpectralFeatures<f64>> {
    let bad = |message: String| Error::Format {
        what: "feature cache",
        message,
    };
    let mut header = [0f64; 8];
    r.read_f64_into::<LittleEndian>(&mut header)
        .map_err(|e| bad(format!("truncated header: {e}")))?;
    if header[0] != CACHE_MAGIC {
        return Err(bad("bad magic number".into()));
    }
    if header[1] != CACHE_VERSION {
        return Err(bad(format!("unsupported version {}", header[1])));
    }
    let (rows, cols, d) = (header[2] as usize, header[3] as usize, header[4] as usize);
    if cols != 2 * d {
        return Err(bad(format!("column count {cols} does not match d = {d}")));
    }
    let mut data = vec![0f64; rows * cols];
    r.read_f64_into::<LittleEndian>(&mut data)
        .map_err(|e| bad(format!("truncated body: {e}")))?;
    let all = DenseMatrix::from_vec(rows, cols, data)?;
    combine_features(all.column_block(0, d), all.column_block(d, cols), header[5])
}

pub fn save_cache(path: &Path, f: &SpectralFeatures<f64>) -> Result<()> {
    let mut buf = Vec::new();
    write_cache(&mut buf, f)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<SpectralFeatures<f64>> {
    read_cache(fs::File::open(path)?)
}
