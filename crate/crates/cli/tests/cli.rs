use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn scoreline(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scoreline"))
        .arg("--config")
        .arg(sample_dir().join("run.toml"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn train_writes_two_artifacts_and_a_manifest() {
    let out = tempfile::tempdir().unwrap();
    ok(&scoreline(out.path(), &["--approach", "team-stats", "--technique", "rfr", "train"]));
    let dir = out.path().join("models/team-stats-rfr");
    for file in ["home.json", "away.json"] {
        let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join(file)).unwrap()).unwrap();
        assert_eq!(v["seed"], 42);
        assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["test_size"], 8);
}

#[test]
fn training_is_reproducible_byte_for_byte() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for out in [&a, &b] {
        ok(&scoreline(out.path(), &["--model", "lineup-stats:rfr", "train"]));
    }
    for file in ["home.json", "away.json", "manifest.json"] {
        let read = |d: &tempfile::TempDir| fs::read(d.path().join("models/lineup-stats-rfr").join(file)).unwrap();
        assert_eq!(read(&a), read(&b), "{file}");
    }
}

#[test]
fn unknown_approach_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let o = scoreline(out.path(), &["--approach", "vibes", "--technique", "lr", "train"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_model_choice_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let o = scoreline(out.path(), &["evaluate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluating_an_untrained_model_fails_with_code_1() {
    let out = tempfile::tempdir().unwrap();
    let o = scoreline(out.path(), &["--model", "players:knn", "evaluate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn home_win_evaluation_reports_both_sides() {
    let out = tempfile::tempdir().unwrap();
    ok(&scoreline(out.path(), &["--model", "home-win", "evaluate"]));
    let fitness = fs::read_to_string(out.path().join("report/fitness.csv")).unwrap();
    assert!(fitness.starts_with("# config_hash="));
    let rows = data_lines(&out.path().join("report/fitness.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("Home Win,home,"));
    assert!(rows[2].starts_with("Home Win,away,"));
}

#[test]
fn predict_covers_every_upcoming_fixture() {
    let out = tempfile::tempdir().unwrap();
    ok(&scoreline(out.path(), &["--model", "team-stats:lr", "train"]));
    let upcoming = sample_dir().join("upcoming.csv");
    ok(&scoreline(
        out.path(),
        &["--model", "team-stats:lr", "predict", "--fixtures", upcoming.to_str().unwrap()],
    ));
    let rows = data_lines(&out.path().join("predictions.csv"));
    assert_eq!(rows.len(), 1 + 4);
    // Results are unknown, so the actual columns stay blank.
    assert!(rows[1..].iter().all(|r| r.ends_with(",,")));
}

#[test]
fn bet_writes_a_ledger_for_each_test_fixture() {
    let out = tempfile::tempdir().unwrap();
    ok(&scoreline(out.path(), &["--model", "tradition", "--missing-odds", "lose", "bet"]));
    assert_eq!(data_lines(&out.path().join("report/betting_ledger.csv")).len(), 1 + 8);
    let summary = data_lines(&out.path().join("report/betting.csv"));
    assert!(summary[1].starts_with("Tradition,1,lose,8,0,"), "{}", summary[1]);
}

#[test]
fn importance_ranks_all_52_columns_per_side() {
    let out = tempfile::tempdir().unwrap();
    ok(&scoreline(out.path(), &["importance"]));
    let rows = data_lines(&out.path().join("report/importance.csv"));
    assert_eq!(rows.len(), 1 + 2 * 52);
}
