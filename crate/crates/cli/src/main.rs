use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gegennet::analysis::{fit_report, signal_for_split, spectral_signal, SpectralSignal, TARGET_DEFINITION};
use gegennet::features::{cache_key, load_cache, save_cache, spectral_features, FeatureOptions};
use gegennet::filter::{classic_filter_curve, uniform_grid, FilterKind, CURVE_GRID_POINTS};
use gegennet::graph::{
    build_sign_matrices, normalize_adjacency, split_edges, symmetrize, EdgeListFormat, EdgeSplit, Sign, SignedBipartiteGraph,
};
use gegennet::linalg::{DenseMatrix, SolverOptions};
use gegennet::model::{load_checkpoint, save_checkpoint, write_history, ModelConfig, Problem};
use gegennet::pipeline::{build_features, data_dir, load_edge_list, load_split, locate_dataset, run_experiment, MetricsReport};
use gegennet::selftest::run_selftest;
use gegennet::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "gegennet", version, about = "Link sign prediction on signed bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an edge list and write a train/validation/test split manifest.
    Prepare {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
        ratios: [f64; 3],
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Manifest path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute the spectral feature cache from the training edges.
    InitFeatures {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 0.3)]
        mu: f64,
        #[arg(long)]
        signed_laplacian: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train a model and write test-set metrics as JSON.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        split: SplitArgs,
        /// TOML model configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Feature cache from `init-features`.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Metrics path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Per-epoch loss and validation metrics as JSON lines.
        #[arg(long)]
        history: Option<PathBuf>,
        /// Write `wall_seconds: null` so that repeated runs compare byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// Score a split with a saved checkpoint.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SetChoice::Test)]
        set: SetChoice,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Rayleigh quotients of held-out edges against training eigenvectors, as CSV.
    AnalyzeSpectrum {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, value_enum, default_value_t = SignChoice::Pos)]
        source: SignChoice,
        #[arg(long, value_enum, default_value_t = SignChoice::Pos)]
        target: SignChoice,
        /// Use the training operator itself as the target.
        #[arg(long)]
        self_target: bool,
        /// Signal CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Directory receiving one `<filter>.csv` per reference curve.
        #[arg(long)]
        curves_dir: Option<PathBuf>,
        /// JSON file with the least-squares fit of each reference curve.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Run the oracle checks on seeded synthetic graphs.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Edge list with `u v sign` lines.
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    input: Option<PathBuf>,
    /// Named dataset looked up under $GEGENNET_DATA_DIR or ./data.
    #[arg(long)]
    dataset: Option<String>,
    /// Treat the sign column as a rating: above MIDPOINT is positive.
    #[arg(long, value_name = "MIDPOINT")]
    threshold: Option<f64>,
}

#[derive(Args)]
struct SplitArgs {
    /// Split manifest from `prepare`; otherwise the split is drawn here.
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
    ratios: [f64; 3],
    /// Seeds the split and, for `train`, overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignChoice {
    Pos,
    Neg,
}

impl From<SignChoice> for Sign {
    fn from(s: SignChoice) -> Self {
        match s {
            SignChoice::Pos => Sign::Positive,
            SignChoice::Neg => Sign::Negative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SetChoice {
    Train,
    Validation,
    Test,
}

fn parse_ratios(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three comma-separated ratios, got {}", v.len()))
}

struct Loaded {
    name: String,
    bytes: Vec<u8>,
    graph: SignedBipartiteGraph,
}

impl InputArgs {
    fn path(&self) -> Result<(String, PathBuf), Error> {
        match (&self.input, &self.dataset) {
            (Some(p), _) => {
                let name = p.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
                Ok((name, p.clone()))
            }
            (None, Some(name)) => {
                let dir = data_dir(Path::new("."));
                let path = locate_dataset(&dir, name).ok_or_else(|| {
                    Error::Io(io::Error::new(
                        io::ErrorKind::NotFound,
                        format!("dataset {name:?} not found in {}", dir.display()),
                    ))
                })?;
                Ok((name.to_ascii_lowercase(), path))
            }
            (None, None) => Err(Error::InvalidParameter("one of --input or --dataset is required".into())),
        }
    }

    fn load(&self) -> Result<Loaded, Error> {
        let (name, path) = self.path()?;
        let format = self.threshold.map_or_else(EdgeListFormat::default, EdgeListFormat::threshold);
        let graph = load_edge_list(&path, &format).map_err(|e| match e {
            Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
            other => other,
        })?;
        Ok(Loaded { name, bytes: fs::read(&path)?, graph })
    }
}

impl SplitArgs {
    fn resolve(&self, g: &SignedBipartiteGraph, fallback_seed: u64) -> Result<EdgeSplit, Error> {
        let split = match &self.split {
            Some(p) => load_split(p)?,
            None => split_edges(g, self.ratios, self.seed.unwrap_or(fallback_seed))?,
        };
        split.validate(g.edge_count())?;
        Ok(split)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ModelConfig, Error> {
    match path {
        Some(p) => ModelConfig::from_toml(&fs::read_to_string(p)?),
        None => Ok(ModelConfig::default()),
    }
}

fn cached_features(path: &Path, g: &SignedBipartiteGraph, cfg: &ModelConfig) -> Result<DenseMatrix<f64>, Error> {
    let f = load_cache(path)?;
    if f.x.rows() != g.node_count() || f.d != cfg.spectral_dim {
        return Err(Error::InvalidParameter(format!(
            "feature cache {} is {}x{}, expected {}x{}",
            path.display(),
            f.x.rows(),
            f.d,
            g.node_count(),
            cfg.spectral_dim
        )));
    }
    Ok(f.x)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Prepare { input, ratios, seed, output } => {
            let data = input.load()?;
            let split = split_edges(&data.graph, ratios, seed)?;
            let (tr, va, te) = split.sizes();
            eprintln!(
                "{}: {} + {} nodes, {} edges ({} positive); split {tr}/{va}/{te}",
                data.name,
                data.graph.u_count(),
                data.graph.v_count(),
                data.graph.edge_count(),
                data.graph.positive_count()
            );
            write_output(output.as_deref(), &(split.to_json()? + "\n"))?;
        }
        Command::InitFeatures { input, split, dim, mu, signed_laplacian, output } => {
            let data = input.load()?;
            let split = split.resolve(&data.graph, 0)?;
            let opts = FeatureOptions { d: dim, mu, signed_laplacian, solver: SolverOptions::default() };
            let f = spectral_features::<f64>(&data.graph, &split.train, &opts)?;
            save_cache(&output, &f)?;
            let key = cache_key(&data.bytes, split.to_json()?.as_bytes(), dim, signed_laplacian);
            println!("{}", serde_json::json!({ "key": key, "rows": f.x.rows(), "d": dim, "path": output }));
        }
        Command::Train { input, split, config, features, output, checkpoint, history, no_timing } => {
            let data = input.load()?;
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = split.seed {
                cfg.seed = seed;
            }
            let split = split.resolve(&data.graph, cfg.seed)?;
            let x = features.as_deref().map(|p| cached_features(p, &data.graph, &cfg)).transpose()?;
            let out = run_experiment(&data.name, &data.graph, &split, &cfg, x, !no_timing)?;
            if let Some(p) = checkpoint {
                save_checkpoint(&p, &cfg, &out.outcome.params)?;
            }
            if let Some(p) = history {
                write_history(fs::File::create(p)?, &out.outcome.history)?;
            }
            write_output(output.as_deref(), &(out.report.to_json()? + "\n"))?;
        }
        Command::Evaluate { input, checkpoint, split, features, set, output, no_timing } => {
            let start = Instant::now();
            let data = input.load()?;
            let (cfg, params) = load_checkpoint::<f64>(&checkpoint)?;
            let split = load_split(&split)?;
            split.validate(data.graph.edge_count())?;
            let x = match features {
                Some(p) => cached_features(&p, &data.graph, &cfg)?,
                None => build_features(&data.graph, &split, &cfg)?,
            };
            let problem = Problem::new(&data.graph, &split, x)?;
            let edges = match set {
                SetChoice::Train => &problem.train,
                SetChoice::Validation => &problem.validation,
                SetChoice::Test => &problem.test,
            };
            let m = problem.evaluate(&params, &cfg, edges)?;
            let report = MetricsReport {
                dataset: data.name,
                seed: cfg.seed,
                config_hash: cfg.hash(),
                auc: m.auc,
                macro_f1: m.macro_f1,
                f1_positive: m.f1_positive,
                f1_negative: m.f1_negative,
                epochs_run: 0,
                best_epoch: 0,
                wall_seconds: (!no_timing).then(|| start.elapsed().as_secs_f64()),
            };
            write_output(output.as_deref(), &(report.to_json()? + "\n"))?;
        }
        Command::AnalyzeSpectrum { input, split, source, target, self_target, output, curves_dir, fits } => {
            let data = input.load()?;
            let split = split.resolve(&data.graph, 0)?;
            let signal = if self_target {
                let m = build_sign_matrices::<f64>(&data.graph, &split.train)?;
                let a = normalize_adjacency(&symmetrize(match Sign::from(source) {
                    Sign::Positive => &m.a_pos,
                    Sign::Negative => &m.a_neg,
                }));
                SpectralSignal { source_sign: source.into(), target_sign: source.into(), points: spectral_signal(&a, &a)? }
            } else {
                signal_for_split(&data.graph, &split, source.into(), target.into())?
            };
            let mut csv = Vec::new();
            signal.write_csv(&mut csv)?;
            write_output(output.as_deref(), &String::from_utf8_lossy(&csv))?;
            let grid = uniform_grid(CURVE_GRID_POINTS);
            let curves = FilterKind::reference_set()
                .into_iter()
                .map(|k| classic_filter_curve(k, &grid))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(dir) = curves_dir {
                fs::create_dir_all(&dir)?;
                for c in &curves {
                    fs::write(dir.join(format!("{}.csv", c.name())), c.to_csv())?;
                }
            }
            if let Some(p) = fits {
                let doc = serde_json::json!({
                    "dataset": data.name,
                    "target": if self_target { "training operator" } else { TARGET_DEFINITION },
                    "fits": fit_report(&signal.points, &curves)?,
                });
                fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
            }
            eprintln!("target matrix: {}", if self_target { "training operator" } else { TARGET_DEFINITION });
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(seed)?;
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{} {}: worst {:.3e} (tolerance {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.tolerance
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", checks.len());
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
