//! The sign-aware spectral network, its edge scorer, gradients and training.

mod checkpoint;
mod config;
mod network;
mod optim;
mod params;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use config::{FeatureSource, ModelConfig};
pub use network::{
    backward, bce_logit_gradient, bce_loss, forward, linearized_forward, loss_and_gradients,
    predict_scores, predictor_backward, predictor_forward, sigmoid, Batch, ForwardCache, PredictorCache,
    BCE_EPSILON, MAX_LINEARIZED_LAYERS,
};
pub use optim::Adam;
pub use params::{LayerParams, ModelParams, PredictorParams, PRELU_INIT};
pub use train::{train, write_history, EdgeSet, EpochRecord, Problem, TrainOutcome};
