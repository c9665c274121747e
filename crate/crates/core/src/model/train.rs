use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::network::{forward, loss_and_gradients, predict_scores, Batch};
use super::optim::Adam;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::graph::{build_sign_matrices, normalize_adjacency, symmetrize, EdgeSplit, Sign, SignedBipartiteGraph};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::metrics::{evaluate, Metrics};
use crate::scalar::Scalar;

/// Offset mixed into the seed for the dropout stream so it differs from the
/// initialisation stream.
const DROPOUT_STREAM: u64 = 0x6a09_e667_f3bc_c909;

/// Labelled `(u, v)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSet<T> {
    pub pairs: Vec<(usize, usize)>,
    pub signs: Vec<Sign>,
    /// `1` for positive, `0` for negative.
    pub labels: Vec<T>,
}

impl<T: Scalar> EdgeSet<T> {
    pub fn from_indices(g: &SignedBipartiteGraph, indices: &[usize]) -> Result<Self> {
        let mut set = EdgeSet {
            pairs: Vec::with_capacity(indices.len()),
            signs: Vec::with_capacity(indices.len()),
            labels: Vec::with_capacity(indices.len()),
        };
        for &k in indices {
            let e = g
                .edges()
                .get(k)
                .ok_or_else(|| Error::IndexOutOfRange(format!("edge {k} of {}", g.edge_count())))?;
            set.pairs.push((e.u, e.v));
            set.signs.push(e.sign);
            set.labels.push(T::of(f64::from(e.sign.label())));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Operators, features and labelled edges for one split of one graph.
///
/// The propagation operators are built from training edges only.
#[derive(Clone, Debug)]
pub struct Problem<T> {
    pub x: DenseMatrix<T>,
    pub a_pos: SparseMatrix<T>,
    pub a_neg: SparseMatrix<T>,
    pub u_count: usize,
    pub train: EdgeSet<T>,
    pub validation: EdgeSet<T>,
    pub test: EdgeSet<T>,
}

impl<T: Scalar> Problem<T> {
    pub fn new(g: &SignedBipartiteGraph, split: &EdgeSplit, x: DenseMatrix<T>) -> Result<Self> {
        split.validate(g.edge_count())?;
        if x.rows() != g.node_count() {
            return Err(Error::shape(
                "Problem::new",
                format!("{} feature rows", g.node_count()),
                format!("{}", x.rows()),
            ));
        }
        let m = build_sign_matrices::<T>(g, &split.train)?;
        Ok(Self {
            x,
            a_pos: normalize_adjacency(&symmetrize(&m.a_pos)),
            a_neg: normalize_adjacency(&symmetrize(&m.a_neg)),
            u_count: g.u_count(),
            train: EdgeSet::from_indices(g, &split.train)?,
            validation: EdgeSet::from_indices(g, &split.validation)?,
            test: EdgeSet::from_indices(g, &split.test)?,
        })
    }

    pub fn train_batch(&self) -> Batch<'_, T> {
        Batch {
            x: &self.x,
            a_pos: &self.a_pos,
            a_neg: &self.a_neg,
            u_count: self.u_count,
            pairs: &self.train.pairs,
            labels: &self.train.labels,
        }
    }

    /// Inference-mode scores for every pair in `set`.
    pub fn scores(&self, params: &ModelParams<T>, cfg: &ModelConfig, set: &EdgeSet<T>) -> Result<Vec<f64>> {
        let (z, _) = forward(params, &self.x, &self.a_pos, &self.a_neg, cfg, None)?;
        Ok(predict_scores(params, &z, self.u_count, &set.pairs)?
            .into_iter()
            .map(Scalar::as_f64)
            .collect())
    }

    pub fn evaluate(&self, params: &ModelParams<T>, cfg: &ModelConfig, set: &EdgeSet<T>) -> Result<Metrics> {
        evaluate(&self.scores(params, cfg, set)?, &set.signs)
    }
}

/// One line of the training history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Absent when the validation set lacks one of the two classes.
    pub val_auc: Option<f64>,
    pub val_macro_f1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters after the best validation epoch.
    pub params: ModelParams<T>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Writes one JSON object per epoch.
pub fn write_history<W: Write>(mut w: W, history: &[EpochRecord]) -> Result<()> {
    for r in history {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Full-batch Adam on the training edges with best-validation-AUC selection
/// and early stopping. When validation AUC is undefined the training loss is
/// used for selection instead.
pub fn train<T: Scalar>(problem: &Problem<T>, cfg: &ModelConfig) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if problem.x.cols() != cfg.spectral_dim {
        return Err(Error::shape(
            "train",
            format!("{} feature columns", cfg.spectral_dim),
            format!("{}", problem.x.cols()),
        ));
    }
    if problem.train.is_empty() {
        return Err(Error::InvalidParameter("training split is empty".into()));
    }
    let mut params = ModelParams::<T>::init(cfg);
    let mut adam = Adam::new(T::of(cfg.learning_rate)).with_weight_decay(T::of(cfg.weight_decay));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ DROPOUT_STREAM);
    let batch = problem.train_batch();

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ModelParams<T>)> = None;
    let mut stale = 0;
    let mut last_loss = f64::NAN;
    for epoch in 1..=cfg.max_epochs {
        let (loss, grads) = match loss_and_gradients(&params, &batch, cfg, Some(&mut rng)) {
            Err(Error::NonFinite { .. }) => return Err(Error::Diverged { epoch, last_loss }),
            other => other?,
        };
        let loss = loss.as_f64();
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, last_loss });
        }
        last_loss = loss;
        adam.step(&mut params, &grads)?;
        if !params.all_finite() {
            return Err(Error::Diverged { epoch, last_loss });
        }
        let val = if problem.validation.is_empty() {
            None
        } else {
            match problem.evaluate(&params, cfg, &problem.validation) {
                Ok(m) => Some(m),
                Err(Error::SingleClass) => None,
                Err(Error::NonFinite { .. }) => return Err(Error::Diverged { epoch, last_loss }),
                Err(e) => return Err(e),
            }
        };
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            val_auc: val.map(|m| m.auc),
            val_macro_f1: val.map(|m| m.macro_f1),
        });
        let score = val.map_or(-loss, |m| m.auc);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, epoch, params.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let (_, best_epoch, params) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        params,
        best_epoch,
        epochs_run: history.len(),
        history,
    })
}
