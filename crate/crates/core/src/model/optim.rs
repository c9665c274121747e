use super::params::ModelParams;
use crate::error::Result;
use crate::scalar::Scalar;

/// Adam with bias correction and decoupled weight decay: each step also
/// shrinks every parameter by `learning_rate · weight_decay · w`.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub weight_decay: T,
    m: Vec<T>,
    v: Vec<T>,
    step: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(learning_rate: T) -> Self {
        Self {
            learning_rate,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
            weight_decay: T::zero(),
            m: Vec::new(),
            v: Vec::new(),
            step: 0,
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: T) -> Self {
        self.weight_decay = weight_decay;
        self
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) -> Result<()> {
        let mut w = params.to_flat();
        let g = grads.to_flat();
        if self.m.len() != w.len() {
            self.m = vec![T::zero(); w.len()];
            self.v = vec![T::zero(); w.len()];
        }
        self.step += 1;
        let c1 = T::one() - self.beta1.powi(self.step);
        let c2 = T::one() - self.beta2.powi(self.step);
        for i in 0..w.len() {
            self.m[i] = self.beta1 * self.m[i] + (T::one() - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (T::one() - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            let decay = self.weight_decay * w[i];
            w[i] -= self.learning_rate * (m_hat / (v_hat.sqrt() + self.epsilon) + decay);
        }
        params.set_flat(&w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = ModelConfig { layers: 1, embed_dim: 2, spectral_dim: 2, ..ModelConfig::default() };
        let mut p = ModelParams::<f64>::init(&cfg);
        let before = p.to_flat();
        let mut g = p.zeros_like();
        g.w0[(0, 0)] = 3.0;
        g.w0[(1, 1)] = -0.01;
        let mut adam = Adam::new(0.01);
        adam.step(&mut p, &g).unwrap();
        let after = p.to_flat();
        assert!((before[0] - after[0] - 0.01).abs() < 1e-9);
        assert!((after[3] - before[3] - 0.01).abs() < 1e-6);
        assert_eq!(before[1], after[1]);
        assert_eq!(adam.steps_taken(), 1);
    }

    #[test]
    fn decay_is_independent_of_the_gradient() {
        let cfg = ModelConfig { layers: 1, embed_dim: 2, spectral_dim: 2, ..ModelConfig::default() };
        let mut p = ModelParams::<f64>::init(&cfg);
        let before = p.to_flat();
        let mut adam = Adam::new(0.1).with_weight_decay(0.5);
        let zero = p.zeros_like();
        adam.step(&mut p, &zero).unwrap();
        for (a, b) in p.to_flat().iter().zip(&before) {
            assert!((a - b * (1.0 - 0.05)).abs() < 1e-15);
        }
    }
}
