use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use riga_cli::{build_report, run_command, AugmenterKind, CliError, Command, ExperimentManifest, PipelineConfig};
use sha2::{Digest, Sha256};

fn quick(dir: &Path, source: &str) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.dataset.source = source.into();
    cfg.output.dir = dir.to_path_buf();
    cfg.classify.gbdt.n_trees = 20;
    cfg.transform.embedding.iterations = 250;
    cfg.bn.search.max_iterations = 40;
    cfg.bn.search.restarts = 1;
    cfg
}

fn files_under(root: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out
}

fn sha(path: PathBuf) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn transform_360_features_and_rerun_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick(&tmp.path().join("a"), "synth:120,30,360,1.5");
    cfg.output.row_images = 3;
    let m = run_command(Command::Transform, &cfg).unwrap();
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/mapping.json")).unwrap()).unwrap();
    assert_eq!(file["features"].as_array().unwrap().len(), 360);
    assert_eq!(file["grid_size"], 28);
    assert!(m.dataset.normalization.is_some());
    let mut expected: BTreeSet<String> = m.artifacts.iter().cloned().collect();
    expected.insert("manifest.json".into());
    assert_eq!(files_under(&tmp.path().join("a")), expected);
    assert!(expected.contains("images/row_00002.pgm") && expected.contains("sample_grid.pgm"));

    cfg.output.dir = tmp.path().join("b");
    let again = run_command(Command::Transform, &cfg).unwrap();
    assert_eq!(sha(tmp.path().join("a/mapping.json")), sha(tmp.path().join("b/mapping.json")));
    assert_eq!(again.content_hash, m.content_hash);
}

#[test]
fn grid_too_small_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick(tmp.path(), "synth:120,30,360,1.5");
    cfg.transform.grid_size = 10;
    let err = run_command(Command::Transform, &cfg).unwrap_err();
    assert!(err.to_string().contains("360"), "{err}");
    assert!(!tmp.path().join("mapping.json").exists());
}

#[test]
fn invalid_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick(&tmp.path().join("out"), "synth:50,10,4,2.0");
    cfg.classify.folds = 1;
    assert!(matches!(run_command(Command::Pipeline, &cfg), Err(CliError::Config(_))));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn pipeline_without_augmentation_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick(&tmp.path().join("none"), "synth:180,30,6,2.0");
    let none = run_command(Command::Pipeline, &cfg).unwrap();
    assert_eq!(none.results.len(), 1);
    assert_eq!(none.results[0].label, "GBDT w/o Augmentation");
    assert_eq!(none.results[0].per_fold.len(), 5);
    assert!(none.results[0].folds.iter().all(|f| f.n_synthetic == 0));
    let loaded = ExperimentManifest::load(tmp.path().join("none/manifest.json")).unwrap();
    assert_eq!(loaded, none);
    assert!(loaded.is_intact());

    let mut smote = cfg.clone();
    smote.output.dir = tmp.path().join("smote");
    smote.augment.method = AugmenterKind::Smote;
    smote.bn.enabled = true;
    let m = run_command(Command::Pipeline, &smote).unwrap();
    assert_eq!(m.results[0].label, "GBDT + SMOTE");
    assert!(m.results[0].folds.iter().all(|f| f.n_synthetic > 0));
    let bn = m.bn.as_ref().unwrap();
    assert_eq!(bn.original.n_rows, 210);
    assert_eq!(bn.augmented.as_ref().unwrap().n_rows, 360);
    for a in ["bn/original.dot", "bn/augmented.dot", "bn/blanket_original.dot", "bn/blanket_augmented.txt", "real_vs_synthetic.pgm"] {
        assert!(m.artifacts.iter().any(|x| x == a), "{a}");
    }
    let mut expected: BTreeSet<String> = m.artifacts.iter().cloned().collect();
    expected.insert("manifest.json".into());
    assert_eq!(files_under(&smote.output.dir), expected);

    let report_dir = tmp.path().join("report");
    let paths = [tmp.path().join("none/manifest.json"), tmp.path().join("smote/manifest.json")];
    let report = build_report(&paths, &report_dir).unwrap();
    let rows: Vec<&str> = report.table.lines().filter(|l| l.starts_with("| GBDT")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(&none.results[0].to_string()));
    assert!(report.table.contains("| Method | synth |"));
    assert!(report.artifacts.contains(&"roc_synth.svg".to_string()));
    assert!(report.artifacts.contains(&"grids/synth_gbdt_smote.pgm".to_string()));

    let single = build_report(&paths[..1], tmp.path().join("single")).unwrap();
    assert_eq!(single.table.lines().filter(|l| l.starts_with("| GBDT")).count(), 1);

    let dup = build_report(&[paths[0].clone(), paths[0].clone()], tmp.path().join("dup"));
    assert!(matches!(dup, Err(CliError::Incompatible(_))));

    let mut other = cfg.clone();
    other.seed = 9;
    other.augment.method = AugmenterKind::Adasyn;
    other.output.dir = tmp.path().join("other");
    run_command(Command::Classify, &other).unwrap();
    let mixed = build_report(&[paths[0].clone(), tmp.path().join("other/manifest.json")], tmp.path().join("mixed"));
    assert!(matches!(mixed, Err(CliError::Incompatible(_))), "different synthetic data under one dataset name");

    let mut tampered = loaded.clone();
    tampered.results[0].mean = 0.99;
    std::fs::write(tmp.path().join("tampered.json"), serde_json::to_string(&tampered).unwrap()).unwrap();
    assert!(build_report(&[tmp.path().join("tampered.json")], tmp.path().join("t")).is_err());
}

#[test]
fn identical_runs_share_a_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick(&tmp.path().join("1"), "synth:150,30,5,2.0");
    cfg.augment.method = AugmenterKind::Adasyn;
    let a = run_command(Command::Classify, &cfg).unwrap();
    cfg.output.dir = tmp.path().join("2");
    let b = run_command(Command::Classify, &cfg).unwrap();
    assert_eq!(a.content_hash, b.content_hash);
    assert_eq!(a.seeds, b.seeds);
    cfg.seed += 1;
    cfg.output.dir = tmp.path().join("3");
    assert_ne!(run_command(Command::Classify, &cfg).unwrap().content_hash, a.content_hash);
}

#[test]
fn augment_writes_augmented_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick(tmp.path(), "synth:60,15,4,2.0");
    assert!(run_command(Command::Augment, &cfg).is_err());
    cfg.augment.method = AugmenterKind::Smote;
    run_command(Command::Augment, &cfg).unwrap();
    let ds: riga_core::Dataset = riga_core::load_csv(tmp.path().join("augmented.csv"), "label", "NA").unwrap();
    assert_eq!(ds.class_counts(), [60, 60]);
    let samples: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("samples.json")).unwrap()).unwrap();
    assert_eq!(samples["real"].as_array().unwrap().len(), 15);
    assert_eq!(samples["synthetic"].as_array().unwrap().len(), 16);
}

#[test]
fn bnlearn_reports_blanket() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick(tmp.path(), "synth:150,50,4,3.0");
    let m = run_command(Command::Bnlearn, &cfg).unwrap();
    let bn = m.bn.unwrap();
    assert!(bn.augmented.is_none());
    assert!(bn.original.bic >= bn.original.empty_bic);
    let text = std::fs::read_to_string(tmp.path().join("bn/blanket_original.txt")).unwrap();
    assert!(text.contains("Markov blanket of label"));
}

#[test]
fn binary_explain_and_flags() {
    let exe = env!("CARGO_BIN_EXE_riga");
    let out = Process::new(exe).args(["pipeline", "--explain", "--augmenter", "vqvae", "--folds", "3", "--grid-size", "16"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = PipelineConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.augment.method, AugmenterKind::Vqvae);
    assert_eq!(cfg.classify.folds, 3);
    assert_eq!(cfg.transform.grid_size, 16);

    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("bad.toml");
    std::fs::write(&conf, "[classify]\nfold = 3\n").unwrap();
    let out = Process::new(exe).args(["classify", "--config"]).arg(&conf).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fold"));
}

#[test]
fn binary_classify_then_report() {
    let exe = env!("CARGO_BIN_EXE_riga");
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let out = Process::new(exe)
        .args(["classify", "--dataset", "synth:80,20,4,2.0", "--folds", "4", "--out"])
        .arg(&run)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("GBDT w/o Augmentation, synth: "), "{stdout}");
    let out = Process::new(exe).arg("report").arg(run.join("manifest.json")).arg("--out").arg(tmp.path().join("rep")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("| GBDT w/o Augmentation | "));
}
