use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gegennet::graph::{Sign, SignedBipartiteGraph};
use gegennet::synthetic::{planted_graph, uniform_graph, PlantedGraph};
use serde_json::Value;
use tempfile::TempDir;

fn gegennet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gegennet")).args(args).output().unwrap()
}

fn write_edge_list(dir: &Path, name: &str, g: &SignedBipartiteGraph) -> PathBuf {
    let text: String = g
        .edges()
        .iter()
        .map(|e| format!("u{}\tv{}\t{}\n", e.u, e.v, if e.sign == Sign::Positive { "1" } else { "-1" }))
        .collect();
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn review_shaped(dir: &Path) -> PathBuf {
    let g = planted_graph(&PlantedGraph {
        u_count: 182,
        v_count: 304,
        edges: 1170,
        rank: 3,
        bias: 1.0,
        noise: 0.2,
        seed: 11,
    })
    .unwrap();
    write_edge_list(dir, "review.tsv", &g)
}

fn quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("quick.toml");
    fs::write(&path, "layers = 2\nembed_dim = 8\nspectral_dim = 8\nmax_epochs = 15\npatience = 15\n").unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn prepare_splits_review_sized_input() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let manifest = dir.path().join("split.json");
    let out = gegennet(&["prepare", "--input", s(&input), "--ratios", "0.8,0.1,0.1", "--seed", "7", "--output", s(&manifest)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let split: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let len = |k: &str| split[k].as_array().unwrap().len();
    assert_eq!((len("train"), len("validation"), len("test")), (936, 117, 117));
    assert_eq!(split["seed"], 7);
}

#[test]
fn train_is_deterministic_and_evaluate_reproduces_it() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let cfg = quick_config(dir.path());
    let manifest = dir.path().join("split.json");
    assert!(gegennet(&["prepare", "--input", s(&input), "--seed", "3", "--output", s(&manifest)]).status.success());
    let ckpt = dir.path().join("model.bin");
    let history = dir.path().join("history.csv");
    let train = |extra: &[&str]| {
        let mut args = vec!["train", "--input", s(&input), "--split", s(&manifest), "--config", s(&cfg), "--no-timing"];
        args.extend_from_slice(extra);
        let out = gegennet(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = train(&["--checkpoint", s(&ckpt), "--history", s(&history)]);
    let second = train(&[]);
    assert_eq!(first, second);
    let metrics: Value = serde_json::from_slice(&first).unwrap();
    for key in ["dataset", "seed", "config_hash", "auc", "macro_f1", "f1_positive", "f1_negative", "epochs_run", "best_epoch"] {
        assert!(metrics.get(key).is_some(), "missing {key}");
    }
    assert!(metrics["wall_seconds"].is_null());
    assert!(fs::read_to_string(&history).unwrap().lines().count() > 1);

    let eval = gegennet(&["evaluate", "--input", s(&input), "--checkpoint", s(&ckpt), "--split", s(&manifest), "--no-timing"]);
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    let evaluated: Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(evaluated["auc"], metrics["auc"]);
    assert_eq!(evaluated["macro_f1"], metrics["macro_f1"]);
}

#[test]
fn timing_is_recorded_by_default() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let cfg = quick_config(dir.path());
    let out = gegennet(&["train", "--input", s(&input), "--config", s(&cfg), "--seed", "1"]);
    assert!(out.status.success());
    let metrics: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(metrics["wall_seconds"].as_f64().unwrap() > 0.0);
    assert_eq!(metrics["seed"], 1);
}

#[test]
fn cached_features_match_fresh_ones() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let cfg = quick_config(dir.path());
    let manifest = dir.path().join("split.json");
    let cache = dir.path().join("features.bin");
    assert!(gegennet(&["prepare", "--input", s(&input), "--output", s(&manifest)]).status.success());
    let init = gegennet(&["init-features", "--input", s(&input), "--split", s(&manifest), "--dim", "8", "--output", s(&cache)]);
    assert!(init.status.success(), "{}", String::from_utf8_lossy(&init.stderr));
    let info: Value = serde_json::from_slice(&init.stdout).unwrap();
    assert_eq!(info["key"].as_str().unwrap().len(), 64);
    let base = ["train", "--input", s(&input), "--split", s(&manifest), "--config", s(&cfg), "--no-timing"];
    let fresh = gegennet(&base);
    let cached = gegennet(&[&base[..], &["--features", s(&cache)]].concat());
    assert!(cached.status.success(), "{}", String::from_utf8_lossy(&cached.stderr));
    assert_eq!(fresh.stdout, cached.stdout);

    let wrong = gegennet(&["train", "--input", s(&input), "--split", s(&manifest), "--features", s(&cache)]);
    assert_eq!(wrong.status.code(), Some(1), "default config expects 32 feature columns");
}

#[test]
fn analyze_spectrum_writes_signal_and_fits() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let csv = dir.path().join("signal.csv");
    let fits = dir.path().join("fits.json");
    let curves = dir.path().join("curves");
    let out = gegennet(&[
        "analyze-spectrum", "--input", s(&input), "--source", "pos", "--target", "pos", "--output", s(&csv),
        "--fits", s(&fits), "--curves-dir", s(&curves),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("lambda,rayleigh\n"));
    let nodes = text.lines().count() - 1;
    assert!(nodes > 0 && nodes <= 182 + 304);
    let report: Value = serde_json::from_str(&fs::read_to_string(&fits).unwrap()).unwrap();
    assert_eq!(report["fits"].as_array().unwrap().len(), 6);
    assert!(report["target"].as_str().unwrap().contains("indicator"));
    assert!(curves.join("gegenbauer.csv").is_file());
}

#[test]
fn self_target_reproduces_eigenvalues() {
    let dir = TempDir::new().unwrap();
    let input = review_shaped(dir.path());
    let out = gegennet(&["analyze-spectrum", "--input", s(&input), "--source", "pos", "--self-target"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let (l, r) = line.split_once(',').unwrap();
        let (l, r): (f64, f64) = (l.parse().unwrap(), r.parse().unwrap());
        assert!((l - r).abs() <= 1e-10, "{line}");
    }
}

#[test]
fn selftest_passes() {
    let out = gegennet(&["selftest", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = TempDir::new().unwrap();
    assert_eq!(gegennet(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(gegennet(&["prepare"]).status.code(), Some(1));
    assert_eq!(gegennet(&["--help"]).status.code(), Some(0));

    let missing = dir.path().join("absent.tsv");
    assert_eq!(gegennet(&["prepare", "--input", s(&missing)]).status.code(), Some(2));
    let malformed = dir.path().join("bad.tsv");
    fs::write(&malformed, "a b 1\nc d maybe\n").unwrap();
    let out = gegennet(&["prepare", "--input", s(&malformed)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let input = review_shaped(dir.path());
    assert_eq!(gegennet(&["prepare", "--input", s(&input), "--ratios", "0.5,0.5,0.5"]).status.code(), Some(1));

    // Every edge positive: AUC is undefined on the test set.
    let one_class = write_edge_list(dir.path(), "pos.tsv", &uniform_graph(20, 20, 200, 1.0, 3).unwrap());
    let cfg = quick_config(dir.path());
    assert_eq!(gegennet(&["train", "--input", s(&one_class), "--config", s(&cfg)]).status.code(), Some(3));
}

#[test]
fn rating_threshold_maps_signs() {
    let dir = TempDir::new().unwrap();
    let ratings = dir.path().join("ratings.txt");
    let text: String = (0..40).map(|i| format!("u{} i{} {}\n", i % 8, i / 8, 1 + i % 10)).collect();
    fs::write(&ratings, text).unwrap();
    assert_eq!(gegennet(&["prepare", "--input", s(&ratings)]).status.code(), Some(2));
    let out = gegennet(&["prepare", "--input", s(&ratings), "--threshold", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(20 positive)"));
}

#[test]
fn shipped_config_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let cfg = gegennet::model::ModelConfig::from_toml(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(cfg, gegennet::model::ModelConfig::default());
}
