use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Weights of one sign-aware layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<T> {
    pub w_pos: DenseMatrix<T>,
    pub w_neg: DenseMatrix<T>,
    pub w_org: DenseMatrix<T>,
    /// `3·embed × embed`, rows partitioned into the pos, neg and org blocks.
    pub w_cat: DenseMatrix<T>,
    pub slope_pos: T,
    pub slope_neg: T,
    pub slope_org: T,
}

/// Two-layer edge scorer applied to `[z_u ∥ z_v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictorParams<T> {
    /// `2·embed × embed`.
    pub w1: DenseMatrix<T>,
    /// `1 × embed`.
    pub b1: DenseMatrix<T>,
    /// `embed × 1`.
    pub w2: DenseMatrix<T>,
    pub b2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// `d × embed` input projection.
    pub w0: DenseMatrix<T>,
    pub layers: Vec<LayerParams<T>>,
    pub predictor: PredictorParams<T>,
}

/// Initial negative-side slope of every PReLU.
pub const PRELU_INIT: f64 = 0.25;

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<T> {
    let bound = 1.0 / (rows.max(1) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| T::of(rng.random_range(-bound..=bound)))
}

impl<T: Scalar> ModelParams<T> {
    /// Fan-in scaled uniform weights `U(−1/√fan_in, 1/√fan_in)`, zero biases,
    /// PReLU slopes at 0.25. Deterministic in `cfg.seed`.
    pub fn init(cfg: &ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let e = cfg.embed_dim;
        let w0 = uniform(&mut rng, cfg.spectral_dim, e);
        let layers = (0..cfg.layers)
            .map(|_| LayerParams {
                w_pos: uniform(&mut rng, e, e),
                w_neg: uniform(&mut rng, e, e),
                w_org: uniform(&mut rng, e, e),
                w_cat: uniform(&mut rng, 3 * e, e),
                slope_pos: T::of(PRELU_INIT),
                slope_neg: T::of(PRELU_INIT),
                slope_org: T::of(PRELU_INIT),
            })
            .collect();
        let predictor = PredictorParams {
            w1: uniform(&mut rng, 2 * e, e),
            b1: DenseMatrix::zeros(1, e),
            w2: uniform(&mut rng, e, 1),
            b2: T::zero(),
        };
        Self { w0, layers, predictor }
    }

    pub fn embed_dim(&self) -> usize {
        self.w0.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.w0.rows()
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_tensor_mut(|_, _, _, v| v.iter_mut().for_each(|x| *x = T::zero()));
        z
    }

    /// Visits every tensor as `(name, rows, cols, values)` in a fixed order.
    pub fn for_each_tensor<'a>(&'a self, mut f: impl FnMut(&str, usize, usize, &'a [T])) {
        let mut mat = |name: &str, m: &'a DenseMatrix<T>| f(name, m.rows(), m.cols(), m.as_slice());
        mat("w0", &self.w0);
        for (l, layer) in self.layers.iter().enumerate() {
            mat(&format!("layer{l}.w_pos"), &layer.w_pos);
            mat(&format!("layer{l}.w_neg"), &layer.w_neg);
            mat(&format!("layer{l}.w_org"), &layer.w_org);
            mat(&format!("layer{l}.w_cat"), &layer.w_cat);
        }
        mat("predictor.w1", &self.predictor.w1);
        mat("predictor.b1", &self.predictor.b1);
        mat("predictor.w2", &self.predictor.w2);
        for (l, layer) in self.layers.iter().enumerate() {
            f(&format!("layer{l}.slope_pos"), 1, 1, std::slice::from_ref(&layer.slope_pos));
            f(&format!("layer{l}.slope_neg"), 1, 1, std::slice::from_ref(&layer.slope_neg));
            f(&format!("layer{l}.slope_org"), 1, 1, std::slice::from_ref(&layer.slope_org));
        }
        f("predictor.b2", 1, 1, std::slice::from_ref(&self.predictor.b2));
    }

    /// Mutable counterpart of [`Self::for_each_tensor`], same order.
    pub fn for_each_tensor_mut(&mut self, mut f: impl FnMut(&str, usize, usize, &mut [T])) {
        let mut mat = |name: &str, m: &mut DenseMatrix<T>| {
            let (r, c) = m.shape();
            f(name, r, c, m.as_mut_slice())
        };
        mat("w0", &mut self.w0);
        for (l, layer) in self.layers.iter_mut().enumerate() {
            mat(&format!("layer{l}.w_pos"), &mut layer.w_pos);
            mat(&format!("layer{l}.w_neg"), &mut layer.w_neg);
            mat(&format!("layer{l}.w_org"), &mut layer.w_org);
            mat(&format!("layer{l}.w_cat"), &mut layer.w_cat);
        }
        mat("predictor.w1", &mut self.predictor.w1);
        mat("predictor.b1", &mut self.predictor.b1);
        mat("predictor.w2", &mut self.predictor.w2);
        for (l, layer) in self.layers.iter_mut().enumerate() {
            f(&format!("layer{l}.slope_pos"), 1, 1, std::slice::from_mut(&mut layer.slope_pos));
            f(&format!("layer{l}.slope_neg"), 1, 1, std::slice::from_mut(&mut layer.slope_neg));
            f(&format!("layer{l}.slope_org"), 1, 1, std::slice::from_mut(&mut layer.slope_org));
        }
        f("predictor.b2", 1, 1, std::slice::from_mut(&mut self.predictor.b2));
    }

    pub fn parameter_count(&self) -> usize {
        let mut n = 0;
        self.for_each_tensor(|_, _, _, v| n += v.len());
        n
    }

    /// All parameters concatenated in visiting order.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.parameter_count());
        self.for_each_tensor(|_, _, _, v| out.extend_from_slice(v));
        out
    }

    pub fn set_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::shape(
                "ModelParams::set_flat",
                format!("{} values", self.parameter_count()),
                format!("{}", flat.len()),
            ));
        }
        let mut offset = 0;
        self.for_each_tensor_mut(|_, _, _, v| {
            v.copy_from_slice(&flat[offset..offset + v.len()]);
            offset += v.len();
        });
        Ok(())
    }

    /// `(name, start, end)` ranges of each tensor inside [`Self::to_flat`].
    pub fn layout(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        let mut offset = 0;
        self.for_each_tensor(|name, _, _, v| {
            out.push((name.to_string(), offset, offset + v.len()));
            offset += v.len();
        });
        out
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_tensor(|_, _, _, v| ok &= v.iter().all(|x| x.is_finite()));
        ok
    }

    /// Sets every PReLU slope to `value`.
    pub fn set_slopes(&mut self, value: T) {
        for layer in &mut self.layers {
            layer.slope_pos = value;
            layer.slope_neg = value;
            layer.slope_org = value;
        }
    }
}
