use std::fs;
use std::path::Path;
use std::process::Command;

use pufbench_cli::{EXIT_INVALID_MANIFEST, EXIT_IO, EXIT_OK, EXIT_PARTIAL_FAILURE};

const SMALL: &str = "\
seed = 3
puf.variant = ideal-entropy
puf.n_r = 8
dataset.size = 400
learners = tree, forest, boosted-trees, mlp
learner.forest.n_trees = 3
learner.boosted-trees.boost_rounds = 3
learner.mlp.mlp_hidden_sizes = 16, 8
learner.mlp.epochs = 2
";

fn pufbench(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pufbench")).args(args).current_dir(cwd).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_manifest(dir: &Path, text: &str) -> String {
    let path = dir.join("manifest.txt");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn empty_dataset_is_an_invalid_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), "puf.variant = ideal-entropy\ndataset.size = 0\n");
    let (code, _, err) = pufbench(&["generate", "--manifest", &m, "--out", "run"], tmp.path());
    assert_eq!(code, EXIT_INVALID_MANIFEST, "{err}");
}

#[test]
fn unknown_key_is_an_invalid_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), "puf.variant = ideal-entropy\ndataset.sise = 10\n");
    let (code, _, _) = pufbench(&["generate", "--manifest", &m, "--out", "run"], tmp.path());
    assert_eq!(code, EXIT_INVALID_MANIFEST);
}

#[test]
fn missing_artifacts_are_io_errors() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("empty")).unwrap();
    for cmd in ["attack", "quality", "report"] {
        let (code, _, err) = pufbench(&[cmd, "--out", "empty"], tmp.path());
        assert_eq!(code, EXIT_IO, "{cmd}: {err}");
    }
    let (code, _, _) = pufbench(&["report", "--out", "nowhere"], tmp.path());
    assert_eq!(code, EXIT_IO);
}

#[test]
fn generate_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), SMALL);
    for out in ["a", "b"] {
        let (code, _, err) = pufbench(&["generate", "--manifest", &m, "--out", out], tmp.path());
        assert_eq!(code, EXIT_OK, "{err}");
    }
    for f in ["manifest.txt", "dataset.crp", "split.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn staged_commands_match_all() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), SMALL);
    for cmd in ["generate", "attack", "quality", "report"] {
        let (code, _, err) = pufbench(&[cmd, "--manifest", &m, "--out", "staged"], tmp.path());
        assert_eq!(code, EXIT_OK, "{cmd}: {err}");
    }
    let (code, stdout, err) = pufbench(&["all", "--manifest", &m, "--out", "whole"], tmp.path());
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("tree,DT,100.00"), "{stdout}");
    for f in ["summary.csv", "bit_stats.csv", "curves.csv", "test_accuracy.csv", "quality.csv"] {
        let a = fs::read(tmp.path().join("staged/report").join(f)).unwrap();
        let b = fs::read(tmp.path().join("whole/report").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn json_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), SMALL);
    let (code, _, err) = pufbench(&["all", "--manifest", &m, "--out", "run", "--format", "json", "--learners", "tree"], tmp.path());
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(tmp.path().join("run/report/summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v[1][0]["model"], "tree");
}

#[test]
fn failed_learner_gives_partial_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}learner.mlp.learning_rate = 1e300\n");
    let m = write_manifest(tmp.path(), &text);
    let (code, stdout, err) = pufbench(&["all", "--manifest", &m, "--out", "run"], tmp.path());
    assert_eq!(code, EXIT_PARTIAL_FAILURE, "{err}");
    assert!(tmp.path().join("run/errors/mlp.txt").exists());
    assert!(stdout.contains("tree,DT"), "{stdout}");
    // The report still builds with the failure listed.
    let (code, _, err) = pufbench(&["report", "--out", "run", "--format", "json"], tmp.path());
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("run/report/summary.json")).unwrap()).unwrap();
    assert_eq!(v[2][0], "mlp");
}

#[test]
fn missing_model_without_error_is_incomplete() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_manifest(tmp.path(), SMALL);
    let (code, _, err) = pufbench(&["all", "--manifest", &m, "--out", "run"], tmp.path());
    assert_eq!(code, EXIT_OK, "{err}");
    fs::remove_file(tmp.path().join("run/models/tree.pbm")).unwrap();
    let (code, _, err) = pufbench(&["report", "--out", "run"], tmp.path());
    assert_eq!(code, EXIT_IO, "{err}");
}
