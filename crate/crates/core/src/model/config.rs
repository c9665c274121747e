use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filter::{FirstOrderCoefficient, GegenbauerParams};
use crate::scalar::Scalar;

/// Where the initial node features come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Blend of Laplacian eigenvectors and cosine-block singular vectors.
    #[default]
    Spectral,
    /// Seeded Gaussian features of the same shape (ablation baseline).
    Random,
}

/// Hyperparameters of the network and its training loop.
///
/// Deserialisation rejects unknown keys, so a typo in a config file fails
/// instead of silently falling back to a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub layers: usize,
    pub embed_dim: usize,
    /// Number of spectral feature columns `d`.
    pub spectral_dim: usize,
    pub alpha: f64,
    pub delta: f64,
    pub mu: f64,
    pub dropout: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub first_order_coefficient: FirstOrderCoefficient,
    pub features: FeatureSource,
    pub signed_laplacian: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            embed_dim: 32,
            spectral_dim: 32,
            alpha: 1.5,
            delta: 1.0,
            mu: 0.3,
            dropout: 0.5,
            learning_rate: 0.01,
            weight_decay: 1e-5,
            max_epochs: 300,
            patience: 50,
            seed: 0,
            first_order_coefficient: FirstOrderCoefficient::AlphaPlusHalf,
            features: FeatureSource::Spectral,
            signed_laplacian: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(m));
        if self.layers == 0 {
            return fail("layers must be at least 1".into());
        }
        if self.embed_dim == 0 || self.spectral_dim == 0 {
            return fail("embed_dim and spectral_dim must be positive".into());
        }
        if !(self.alpha >= -0.5) {
            return fail(format!("alpha must be >= -0.5, got {}", self.alpha));
        }
        if !self.delta.is_finite() {
            return fail("delta must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return fail(format!("mu must lie in [0, 1], got {}", self.mu));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return fail(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return fail("max_epochs and patience must be positive".into());
        }
        GegenbauerParams::new(self.alpha, self.first_order_coefficient)?.weights_up_to(self.layers)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format {
            what: "config file",
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn gegenbauer<T: Scalar>(&self) -> Result<GegenbauerParams<T>> {
        GegenbauerParams::new(T::of(self.alpha), self.first_order_coefficient)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is always representable");
        Sha256::digest(&json)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
