//! Forward pass, reverse-mode gradients and the linearised expansion of the
//! sign-aware network.
//!
//! Layer `ℓ` (zero-based) filters its input with the order-`ℓ+1` polynomial:
//!
//! ```text
//! Hin   = dropout(H)
//! H_pos = PReLU(δ · J(Â⁺) Hin W_pos)
//! H_neg = PReLU(δ · J(Â⁻) Hin W_neg)
//! H_org = PReLU(Hin W_org)
//! H'    = [H_pos ∥ H_neg ∥ H_org] W_cat
//! ```
//!
//! `J(Â)` is a polynomial in a symmetric matrix and therefore symmetric, so
//! its adjoint in the backward pass is another application of the same filter.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::params::{ModelParams, PredictorParams};
use crate::error::{Error, Result};
use crate::filter::{gegenbauer_apply, GegenbauerParams};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::scalar::Scalar;

/// Scores are clamped to `[ε, 1−ε]` before taking logarithms.
pub const BCE_EPSILON: f64 = 1e-7;

/// Largest depth accepted by [`linearized_forward`].
pub const MAX_LINEARIZED_LAYERS: usize = 6;

#[derive(Clone, Debug)]
struct LayerCache<T> {
    /// Layer input after dropout.
    input: DenseMatrix<T>,
    /// Inverted-dropout scale per entry; absent when no dropout was applied.
    mask: Option<DenseMatrix<T>>,
    filtered_pos: DenseMatrix<T>,
    filtered_neg: DenseMatrix<T>,
    pre_pos: DenseMatrix<T>,
    pre_neg: DenseMatrix<T>,
    pre_org: DenseMatrix<T>,
    concat: DenseMatrix<T>,
}

/// Intermediate values of a forward pass, consumed by [`backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    x: DenseMatrix<T>,
    layers: Vec<LayerCache<T>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Node count of the inputs that produced this cache.
    pub fn rows(&self) -> usize {
        self.x.rows()
    }
}

fn prelu<T: Scalar>(x: &DenseMatrix<T>, slope: T) -> DenseMatrix<T> {
    x.map(|v| if v > T::zero() { v } else { slope * v })
}

/// Returns the input gradient and the slope gradient.
fn prelu_backward<T: Scalar>(pre: &DenseMatrix<T>, dy: &DenseMatrix<T>, slope: T) -> (DenseMatrix<T>, T) {
    let mut dslope = T::zero();
    let data = pre
        .as_slice()
        .iter()
        .zip(dy.as_slice())
        .map(|(&x, &g)| {
            if x > T::zero() {
                g
            } else {
                dslope += g * x;
                slope * g
            }
        })
        .collect();
    let dx = DenseMatrix::from_vec(pre.rows(), pre.cols(), data).expect("shape preserved");
    (dx, dslope)
}

fn check_finite<T: Scalar>(m: &DenseMatrix<T>, layer: usize, branch: &'static str) -> Result<()> {
    if m.all_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { layer, branch })
    }
}

fn check_inputs<T: Scalar>(
    params: &ModelParams<T>,
    x: &DenseMatrix<T>,
    a_pos: &SparseMatrix<T>,
    a_neg: &SparseMatrix<T>,
) -> Result<()> {
    if x.cols() != params.input_dim() {
        return Err(Error::shape(
            "forward",
            format!("{} feature columns", params.input_dim()),
            format!("{}", x.cols()),
        ));
    }
    let n = x.rows();
    for a in [a_pos, a_neg] {
        if a.shape() != (n, n) {
            return Err(Error::shape("forward", format!("{n}x{n} operator"), format!("{:?}", a.shape())));
        }
    }
    Ok(())
}

fn dropout_mask<T: Scalar>(rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng) -> DenseMatrix<T> {
    let keep = T::of(1.0 / (1.0 - p));
    DenseMatrix::from_fn(rows, cols, |_, _| if rng.random::<f64>() < p { T::zero() } else { keep })
}

/// Runs the embedding layers. Passing a generator enables training mode
/// (dropout with rate `cfg.dropout`); `None` is inference.
pub fn forward<T: Scalar>(
    params: &ModelParams<T>,
    x: &DenseMatrix<T>,
    a_pos: &SparseMatrix<T>,
    a_neg: &SparseMatrix<T>,
    cfg: &ModelConfig,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<(DenseMatrix<T>, ForwardCache<T>)> {
    check_inputs(params, x, a_pos, a_neg)?;
    let filter: GegenbauerParams<T> = cfg.gegenbauer()?;
    let delta = T::of(cfg.delta);
    let e = params.embed_dim();
    let mut h = x.matmul(&params.w0)?;
    check_finite(&h, 0, "input")?;
    let mut layers = Vec::with_capacity(params.layers.len());
    for (l, lp) in params.layers.iter().enumerate() {
        let order = l + 1;
        let (input, mask) = match dropout_rng.as_deref_mut() {
            Some(rng) if cfg.dropout > 0.0 => {
                let mask = dropout_mask(h.rows(), e, cfg.dropout, rng);
                (h.hadamard(&mask)?, Some(mask))
            }
            _ => (h, None),
        };
        let filtered_pos = gegenbauer_apply(a_pos, &input, order, &filter)?;
        let filtered_neg = gegenbauer_apply(a_neg, &input, order, &filter)?;
        let pre_pos = filtered_pos.matmul(&lp.w_pos)?.scaled(delta);
        let pre_neg = filtered_neg.matmul(&lp.w_neg)?.scaled(delta);
        let pre_org = input.matmul(&lp.w_org)?;
        let h_pos = prelu(&pre_pos, lp.slope_pos);
        let h_neg = prelu(&pre_neg, lp.slope_neg);
        let h_org = prelu(&pre_org, lp.slope_org);
        check_finite(&h_pos, l + 1, "pos")?;
        check_finite(&h_neg, l + 1, "neg")?;
        check_finite(&h_org, l + 1, "org")?;
        let concat = DenseMatrix::hstack(&[&h_pos, &h_neg, &h_org])?;
        h = concat.matmul(&lp.w_cat)?;
        check_finite(&h, l + 1, "cat")?;
        layers.push(LayerCache {
            input,
            mask,
            filtered_pos,
            filtered_neg,
            pre_pos,
            pre_neg,
            pre_org,
            concat,
        });
    }
    Ok((h, ForwardCache { x: x.clone(), layers }))
}

/// Gradients of the embedding-layer parameters given `dz = ∂loss/∂Z`.
/// Predictor entries of the result are zero.
pub fn backward<T: Scalar>(
    cache: &ForwardCache<T>,
    params: &ModelParams<T>,
    dz: &DenseMatrix<T>,
    a_pos: &SparseMatrix<T>,
    a_neg: &SparseMatrix<T>,
    cfg: &ModelConfig,
) -> Result<ModelParams<T>> {
    if cache.layers.len() != params.layers.len() || dz.shape() != (cache.x.rows(), params.embed_dim()) {
        return Err(Error::shape(
            "backward",
            format!("{} layers and a {}x{} gradient", params.layers.len(), cache.x.rows(), params.embed_dim()),
            format!("{} layers and a {:?} gradient", cache.layers.len(), dz.shape()),
        ));
    }
    let filter: GegenbauerParams<T> = cfg.gegenbauer()?;
    let delta = T::of(cfg.delta);
    let e = params.embed_dim();
    let mut grads = params.zeros_like();
    let mut dh = dz.clone();
    for l in (0..params.layers.len()).rev() {
        let lp = &params.layers[l];
        let lc = &cache.layers[l];
        let order = l + 1;
        let g = &mut grads.layers[l];

        g.w_cat = lc.concat.t_matmul(&dh)?;
        let dconcat = dh.matmul_t(&lp.w_cat)?;
        let dh_pos = dconcat.column_block(0, e);
        let dh_neg = dconcat.column_block(e, 2 * e);
        let dh_org = dconcat.column_block(2 * e, 3 * e);

        let (dpre_pos, ds_pos) = prelu_backward(&lc.pre_pos, &dh_pos, lp.slope_pos);
        let (dpre_neg, ds_neg) = prelu_backward(&lc.pre_neg, &dh_neg, lp.slope_neg);
        let (dpre_org, ds_org) = prelu_backward(&lc.pre_org, &dh_org, lp.slope_org);
        g.slope_pos = ds_pos;
        g.slope_neg = ds_neg;
        g.slope_org = ds_org;

        g.w_pos = lc.filtered_pos.t_matmul(&dpre_pos)?.scaled(delta);
        g.w_neg = lc.filtered_neg.t_matmul(&dpre_neg)?.scaled(delta);
        g.w_org = lc.input.t_matmul(&dpre_org)?;

        let dfiltered_pos = dpre_pos.matmul_t(&lp.w_pos)?.scaled(delta);
        let dfiltered_neg = dpre_neg.matmul_t(&lp.w_neg)?.scaled(delta);
        let mut dinput = dpre_org.matmul_t(&lp.w_org)?;
        dinput.axpy(T::one(), &gegenbauer_apply(a_pos, &dfiltered_pos, order, &filter)?)?;
        dinput.axpy(T::one(), &gegenbauer_apply(a_neg, &dfiltered_neg, order, &filter)?)?;

        dh = match &lc.mask {
            Some(mask) => dinput.hadamard(mask)?,
            None => dinput,
        };
    }
    grads.w0 = cache.x.t_matmul(&dh)?;
    Ok(grads)
}

/// Expands the network with every PReLU slope treated as 1 and no dropout
/// into its `3^L` linear terms
/// `Σ P^(L)⋯P^(1) X · W0 · M^(1)⋯M^(L)`, `P ∈ {J(Â⁺), J(Â⁻), I}`.
/// Returns the sum and the number of terms.
pub fn linearized_forward<T: Scalar>(
    params: &ModelParams<T>,
    x: &DenseMatrix<T>,
    a_pos: &SparseMatrix<T>,
    a_neg: &SparseMatrix<T>,
    cfg: &ModelConfig,
) -> Result<(DenseMatrix<T>, usize)> {
    check_inputs(params, x, a_pos, a_neg)?;
    let depth = params.layers.len();
    if depth > MAX_LINEARIZED_LAYERS {
        return Err(Error::InvalidParameter(format!(
            "linearized expansion supports at most {MAX_LINEARIZED_LAYERS} layers, got {depth}"
        )));
    }
    let filter: GegenbauerParams<T> = cfg.gegenbauer()?;
    let delta = T::of(cfg.delta);
    let e = params.embed_dim();
    // Per layer: the weight product for each of the pos, neg and org paths.
    let mut path_weights = Vec::with_capacity(depth);
    for lp in &params.layers {
        path_weights.push([
            lp.w_pos.matmul(&lp.w_cat.row_block(0, e))?.scaled(delta),
            lp.w_neg.matmul(&lp.w_cat.row_block(e, 2 * e))?.scaled(delta),
            lp.w_org.matmul(&lp.w_cat.row_block(2 * e, 3 * e))?,
        ]);
    }
    let terms = 3usize.pow(depth as u32);
    let mut z = DenseMatrix::zeros(x.rows(), e);
    for t in 0..terms {
        let mut code = t;
        let mut h = x.clone();
        let mut w = params.w0.clone();
        for (l, paths) in path_weights.iter().enumerate() {
            let choice = code % 3;
            code /= 3;
            h = match choice {
                0 => gegenbauer_apply(a_pos, &h, l + 1, &filter)?,
                1 => gegenbauer_apply(a_neg, &h, l + 1, &filter)?,
                _ => h,
            };
            w = w.matmul(&paths[choice])?;
        }
        z.axpy(T::one(), &h.matmul(&w)?)?;
    }
    Ok((z, terms))
}

/// Intermediate values of the edge scorer.
#[derive(Clone, Debug)]
pub struct PredictorCache<T> {
    rows: Vec<(usize, usize)>,
    input: DenseMatrix<T>,
    hidden_pre: DenseMatrix<T>,
    hidden: DenseMatrix<T>,
}

fn gather_pairs<T: Scalar>(z: &DenseMatrix<T>, u_count: usize, pairs: &[(usize, usize)]) -> Result<(Vec<(usize, usize)>, DenseMatrix<T>)> {
    let e = z.cols();
    let mut rows = Vec::with_capacity(pairs.len());
    let mut data = Vec::with_capacity(pairs.len() * 2 * e);
    for &(u, v) in pairs {
        let (ru, rv) = (u, u_count + v);
        if u >= u_count || rv >= z.rows() {
            return Err(Error::IndexOutOfRange(format!(
                "pair ({u}, {v}) with {u_count} first-partition nodes and {} rows",
                z.rows()
            )));
        }
        data.extend_from_slice(z.row(ru));
        data.extend_from_slice(z.row(rv));
        rows.push((ru, rv));
    }
    Ok((rows, DenseMatrix::from_vec(pairs.len(), 2 * e, data)?))
}

/// Logits `w₂ · ReLU([z_u ∥ z_v] W₁ + b₁) + b₂` for pairs `(u, v)`, where `v`
/// indexes the second partition (row `u_count + v` of `z`).
pub fn predictor_forward<T: Scalar>(
    p: &PredictorParams<T>,
    z: &DenseMatrix<T>,
    u_count: usize,
    pairs: &[(usize, usize)],
) -> Result<(Vec<T>, PredictorCache<T>)> {
    if p.w1.rows() != 2 * z.cols() {
        return Err(Error::shape(
            "predictor",
            format!("{} embedding columns", p.w1.rows() / 2),
            format!("{}", z.cols()),
        ));
    }
    let (rows, input) = gather_pairs(z, u_count, pairs)?;
    let mut hidden_pre = input.matmul(&p.w1)?;
    let b1 = p.b1.row(0);
    for i in 0..hidden_pre.rows() {
        for (h, &b) in hidden_pre.row_mut(i).iter_mut().zip(b1) {
            *h += b;
        }
    }
    let hidden = hidden_pre.map(|v| v.max(T::zero()));
    let logits = hidden.matmul(&p.w2)?.into_vec().into_iter().map(|s| s + p.b2).collect();
    Ok((
        logits,
        PredictorCache {
            rows,
            input,
            hidden_pre,
            hidden,
        },
    ))
}

/// Accumulates predictor gradients into `grads` and the embedding gradient into `dz`.
pub fn predictor_backward<T: Scalar>(
    p: &PredictorParams<T>,
    cache: &PredictorCache<T>,
    dlogits: &[T],
    grads: &mut PredictorParams<T>,
    dz: &mut DenseMatrix<T>,
) -> Result<()> {
    let n = cache.rows.len();
    if dlogits.len() != n {
        return Err(Error::shape("predictor_backward", format!("{n} logit gradients"), format!("{}", dlogits.len())));
    }
    let e = dz.cols();
    let dl = DenseMatrix::from_vec(n, 1, dlogits.to_vec())?;
    grads.b2 += dlogits.iter().copied().sum::<T>();
    grads.w2.axpy(T::one(), &cache.hidden.t_matmul(&dl)?)?;
    let mut dhidden = dl.matmul_t(&p.w2)?;
    for (g, &pre) in dhidden.as_mut_slice().iter_mut().zip(cache.hidden_pre.as_slice()) {
        if pre <= T::zero() {
            *g = T::zero();
        }
    }
    grads.w1.axpy(T::one(), &cache.input.t_matmul(&dhidden)?)?;
    for i in 0..n {
        for (b, &g) in grads.b1.row_mut(0).iter_mut().zip(dhidden.row(i)) {
            *b += g;
        }
    }
    let dinput = dhidden.matmul_t(&p.w1)?;
    for (i, &(ru, rv)) in cache.rows.iter().enumerate() {
        let row = dinput.row(i);
        for (d, &g) in dz.row_mut(ru).iter_mut().zip(&row[..e]) {
            *d += g;
        }
        for (d, &g) in dz.row_mut(rv).iter_mut().zip(&row[e..]) {
            *d += g;
        }
    }
    Ok(())
}

pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let ex = x.exp();
        ex / (T::one() + ex)
    }
}

/// Edge scores in `(0, 1)`.
pub fn predict_scores<T: Scalar>(
    params: &ModelParams<T>,
    z: &DenseMatrix<T>,
    u_count: usize,
    pairs: &[(usize, usize)],
) -> Result<Vec<T>> {
    let (logits, _) = predictor_forward(&params.predictor, z, u_count, pairs)?;
    Ok(logits.into_iter().map(sigmoid).collect())
}

/// Mean binary cross-entropy with labels in `{0, 1}`.
pub fn bce_loss<T: Scalar>(scores: &[T], labels: &[T]) -> Result<T> {
    if scores.len() != labels.len() {
        return Err(Error::shape("bce_loss", format!("{} labels", scores.len()), format!("{}", labels.len())));
    }
    if scores.is_empty() {
        return Err(Error::InvalidParameter("bce_loss of an empty batch".into()));
    }
    let eps = T::of(BCE_EPSILON);
    let total: T = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let s = s.max(eps).min(T::one() - eps);
            -(y * s.ln() + (T::one() - y) * (T::one() - s).ln())
        })
        .sum();
    Ok(total / T::of(scores.len() as f64))
}

/// `∂ mean-BCE / ∂ logit = (σ − y) / N`.
pub fn bce_logit_gradient<T: Scalar>(scores: &[T], labels: &[T]) -> Vec<T> {
    let n = T::of(scores.len() as f64);
    scores.iter().zip(labels).map(|(&s, &y)| (s - y) / n).collect()
}

/// Everything one optimisation step needs.
#[derive(Clone, Copy, Debug)]
pub struct Batch<'a, T> {
    pub x: &'a DenseMatrix<T>,
    pub a_pos: &'a SparseMatrix<T>,
    pub a_neg: &'a SparseMatrix<T>,
    pub u_count: usize,
    pub pairs: &'a [(usize, usize)],
    /// `1` for positive edges, `0` for negative ones.
    pub labels: &'a [T],
}

/// Mean BCE over the batch and its full gradient. Weight decay is applied by
/// the optimiser, not here.
pub fn loss_and_gradients<T: Scalar>(
    params: &ModelParams<T>,
    batch: &Batch<'_, T>,
    cfg: &ModelConfig,
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<(T, ModelParams<T>)> {
    let (z, cache) = forward(params, batch.x, batch.a_pos, batch.a_neg, cfg, dropout_rng)?;
    let (logits, pcache) = predictor_forward(&params.predictor, &z, batch.u_count, batch.pairs)?;
    let scores: Vec<T> = logits.into_iter().map(sigmoid).collect();
    let loss = bce_loss(&scores, batch.labels)?;
    let dlogits = bce_logit_gradient(&scores, batch.labels);
    let mut dz = DenseMatrix::zeros(z.rows(), z.cols());
    let mut pred_grads = params.predictor.clone();
    pred_grads.w1 = DenseMatrix::zeros(pred_grads.w1.rows(), pred_grads.w1.cols());
    pred_grads.b1 = DenseMatrix::zeros(1, pred_grads.b1.cols());
    pred_grads.w2 = DenseMatrix::zeros(pred_grads.w2.rows(), 1);
    pred_grads.b2 = T::zero();
    predictor_backward(&params.predictor, &pcache, &dlogits, &mut pred_grads, &mut dz)?;
    let mut grads = backward(&cache, params, &dz, batch.a_pos, batch.a_neg, cfg)?;
    grads.predictor = pred_grads;
    Ok((loss, grads))
}
