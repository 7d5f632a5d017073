use std::path::Path;

use tactile_core::cli::run;

fn tactile(args: &[&str]) -> i32 {
    run(std::iter::once("tactile").chain(args.iter().copied()))
}

fn small_config(dir: &Path, seed: u64) -> String {
    let path = dir.join(format!("cfg{seed}.json"));
    let cfg = serde_json::json!({
        "seed": seed,
        "protocol": { "repeats": 4 },
        "hyperparams": { "n_trees": 30 },
        "synth": { "options": { "participants": 1, "rating_participants": 4 } },
        "tasks": { "topk_ks": [3, 98] }
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn synth_then_extract_gives_98_feature_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 7);
    let corpus = dir.path().join("d");
    let out = dir.path().join("f");
    assert_eq!(tactile(&["synth", "--config", &cfg, "--out", corpus.to_str().unwrap()]), 0);
    assert_eq!(tactile(&["extract", "--config", &cfg, "--corpus", corpus.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(out.join("features.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let names = tactile_core::extract::feature_names();
    assert_eq!(header.iter().filter(|h| names.iter().any(|n| n == *h)).count(), 98);
    assert_eq!(header.iter().filter(|h| h.starts_with("rating_")).count(), 5);
    assert_eq!(header.len(), 7 + 98 + 5);
}

#[test]
fn extract_on_empty_dir_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(tactile(&["extract", "--corpus", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]), 1);
    assert!(!out.join("features.csv").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(tactile(&["frobnicate"]), 1);
    assert_eq!(tactile(&["model3", "--no-such-flag"]), 1);
    assert_eq!(tactile(&[]), 1);
    assert_eq!(tactile(&["model3"]), 1, "missing --features");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "mystery": true}"#).unwrap();
    assert_eq!(tactile(&["synth", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]), 1);
    std::fs::write(&bad, r#"{"protocol": {"train_fraction": 1.5}}"#).unwrap();
    assert_eq!(tactile(&["synth", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]), 1);
}

fn pipeline(root: &Path, cfg: &str, workers: &str) -> std::path::PathBuf {
    let corpus = root.join("corpus");
    let out = root.join("out");
    let (c, o) = (corpus.to_str().unwrap(), out.to_str().unwrap());
    let f = out.join("features.csv");
    let f = f.to_str().unwrap();
    let common = ["--config", cfg, "--workers", workers];
    assert_eq!(tactile(&[&["synth", "--out", c][..], &common].concat()), 0);
    assert_eq!(tactile(&[&["extract", "--corpus", c, "--out", o][..], &common].concat()), 0);
    for cmd in ["model1", "model2", "model3", "ablate", "topk", "pca", "mds", "spearman"] {
        assert_eq!(tactile(&[&[cmd, "--corpus", c, "--features", f, "--out", o][..], &common].concat()), 0, "{cmd}");
    }
    assert_eq!(tactile(&[&["report", "--out", o][..], &common].concat()), 0);
    out
}

#[test]
fn pipeline_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 11);
    let a = pipeline(&dir.path().join("a"), &cfg, "1");
    let b = pipeline(&dir.path().join("b"), &cfg, "4");
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 20);
    for n in names {
        let x = std::fs::read(a.join(&n)).unwrap();
        let y = std::fs::read(b.join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
}

#[test]
fn report_refuses_mixed_configs_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let (c, o) = (corpus.to_str().unwrap(), dir.path().join("out"));
    let o = o.to_str().unwrap();
    let cfg1 = small_config(dir.path(), 1);
    let cfg2 = small_config(dir.path(), 2);
    assert_eq!(tactile(&["synth", "--config", &cfg1, "--out", c]), 0);
    assert_eq!(tactile(&["model2", "--config", &cfg1, "--corpus", c, "--out", o]), 0);
    assert_eq!(tactile(&["spearman", "--config", &cfg2, "--corpus", c, "--out", o]), 0);
    assert_eq!(tactile(&["report", "--config", &cfg1, "--out", o]), 1);
    assert_eq!(tactile(&["report", "--config", &cfg1, "--out", o, "--force"]), 0);
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(summary.starts_with("# config_hash=mixed"));
    assert!(summary.contains("model2.json,model2,rf_classifier,accuracy"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 3);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(tactile(&["synth", "--config", &cfg, "--out", a.to_str().unwrap()]), 0);
    assert_eq!(tactile(&["synth", "--config", &cfg, "--seed", "4", "--out", b.to_str().unwrap()]), 0);
    let ja = std::fs::read_to_string(a.join("synth.json")).unwrap();
    let jb = std::fs::read_to_string(b.join("synth.json")).unwrap();
    assert!(ja.contains("\"seed\": 3") && jb.contains("\"seed\": 4"));
    assert_ne!(std::fs::read(a.join("truth.csv")).unwrap(), std::fs::read(b.join("truth.csv")).unwrap());
}
