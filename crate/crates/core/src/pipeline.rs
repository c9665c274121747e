//! End-to-end runs: features, training and the metrics report.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{random_features, spectral_features, FeatureOptions};
use crate::graph::{parse_edge_list, EdgeListFormat, EdgeSplit, SignedBipartiteGraph};
use crate::linalg::{DenseMatrix, SolverOptions};
use crate::model::{train, FeatureSource, ModelConfig, Problem, TrainOutcome};

/// Environment variable naming the directory that holds dataset files.
pub const DATA_DIR_ENV: &str = "GEGENNET_DATA_DIR";

/// Published sizes of the benchmark graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub u_count: usize,
    pub v_count: usize,
    pub edges: usize,
}

pub const KNOWN_DATASETS: [DatasetInfo; 4] = [
    DatasetInfo { name: "review", u_count: 182, v_count: 304, edges: 1170 },
    DatasetInfo { name: "senate", u_count: 145, v_count: 1056, edges: 27_083 },
    DatasetInfo { name: "house1to10", u_count: 515, v_count: 1281, edges: 114_378 },
    DatasetInfo { name: "bonanza", u_count: 7919, v_count: 1973, edges: 36_543 },
];

pub fn dataset_info(name: &str) -> Option<DatasetInfo> {
    let lower = name.to_ascii_lowercase();
    KNOWN_DATASETS.iter().copied().find(|d| d.name == lower)
}

/// `$GEGENNET_DATA_DIR` if set, otherwise `data/` under `fallback_root`.
pub fn data_dir(fallback_root: &Path) -> PathBuf {
    env::var_os(DATA_DIR_ENV).map_or_else(|| fallback_root.join("data"), PathBuf::from)
}

/// First existing `<dir>/<name>.{tsv,txt,edgelist}` (name lower-cased).
pub fn locate_dataset(dir: &Path, name: &str) -> Option<PathBuf> {
    let stem = name.to_ascii_lowercase();
    ["tsv", "txt", "edgelist"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

pub fn load_edge_list(path: &Path, format: &EdgeListFormat) -> Result<SignedBipartiteGraph> {
    parse_edge_list(std::io::BufReader::new(fs::File::open(path)?), format)
}

pub fn load_split(path: &Path) -> Result<EdgeSplit> {
    EdgeSplit::from_json(&fs::read_to_string(path)?)
}

/// The metrics document written after training or evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub seed: u64,
    pub config_hash: String,
    pub auc: f64,
    pub macro_f1: f64,
    pub f1_positive: f64,
    pub f1_negative: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// `None` (serialised as `null`) when timing is disabled so that reports
    /// from identical runs compare byte for byte.
    pub wall_seconds: Option<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Initial node features for `cfg`, computed from the training edges.
pub fn build_features(g: &SignedBipartiteGraph, split: &EdgeSplit, cfg: &ModelConfig) -> Result<DenseMatrix<f64>> {
    match cfg.features {
        FeatureSource::Spectral => {
            let opts = FeatureOptions {
                d: cfg.spectral_dim,
                mu: cfg.mu,
                signed_laplacian: cfg.signed_laplacian,
                solver: SolverOptions::default(),
            };
            Ok(spectral_features::<f64>(g, &split.train, &opts)?.x)
        }
        FeatureSource::Random => Ok(random_features(g.node_count(), cfg.spectral_dim, cfg.seed)),
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub outcome: TrainOutcome<f64>,
    pub problem: Problem<f64>,
}

/// Trains on `split.train`, selects on `split.validation` and reports test
/// metrics. Pass precomputed `features` to skip the feature stage.
pub fn run_experiment(
    dataset: &str,
    g: &SignedBipartiteGraph,
    split: &EdgeSplit,
    cfg: &ModelConfig,
    features: Option<DenseMatrix<f64>>,
    record_time: bool,
) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let x = match features {
        Some(x) => x,
        None => build_features(g, split, cfg)?,
    };
    let problem = Problem::new(g, split, x)?;
    let outcome = train(&problem, cfg)?;
    if problem.test.is_empty() {
        return Err(Error::InvalidParameter("test split is empty".into()));
    }
    let m = problem.evaluate(&outcome.params, cfg, &problem.test)?;
    let report = MetricsReport {
        dataset: dataset.to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        auc: m.auc,
        macro_f1: m.macro_f1,
        f1_positive: m.f1_positive,
        f1_negative: m.f1_negative,
        epochs_run: outcome.epochs_run,
        best_epoch: outcome.best_epoch,
        wall_seconds: record_time.then(|| start.elapsed().as_secs_f64()),
    };
    Ok(RunOutput { report, outcome, problem })
}
