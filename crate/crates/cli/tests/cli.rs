use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn perclat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perclat"))
        .args(args)
        .current_dir(dir)
        .env_remove("PERCLAT_SEED")
        .env_remove("PERCLAT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn phat_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclat(dir.path(), &["phat-sweep", "--grid-l", "1,0.4", "--trials", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("phat-sweep.csv")).unwrap();
    assert!(text.starts_with("# perclat phat-sweep schema=1\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][1].as_str(), rows[0][2].as_str()), ("1", "0.25"));
    assert_eq!((rows[1][2].as_str(), rows[1][3].as_str()), ("0", "0"));
}

#[test]
fn survival_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclat(dir.path(), &["survival", "--grid-p", "0,1", "--horizon", "30", "--trials", "50"]);
    assert!(out.status.success());
    let rows = data_rows(&fs::read_to_string(dir.path().join("survival.csv")).unwrap());
    assert_eq!(rows[0][6], "0");
    assert_eq!(rows[1][6], "1");
}

#[test]
fn martingale_at_full_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclat(dir.path(), &["martingale", "--p", "1", "--dstar", "2", "--horizon", "12", "--trials", "20"]);
    assert!(out.status.success());
    let rows = data_rows(&fs::read_to_string(dir.path().join("martingale.trials.csv")).unwrap());
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[1] == "1"));
    assert!(dir.path().join("martingale.hist.csv").exists());
}

#[test]
fn seed_and_output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_perclat"))
        .args(["count-paths", "--p", "0.6", "--horizon", "5"])
        .current_dir(dir.path())
        .env("PERCLAT_SEED", "99")
        .env("PERCLAT_OUT_DIR", "sub")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("sub/count-paths.csv")).unwrap();
    assert!(text.contains("seed=99"));
    // The flag beats the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_perclat"))
        .args(["count-paths", "--p", "0.6", "--horizon", "5", "--seed", "3", "-o", "x.csv"])
        .current_dir(dir.path())
        .env("PERCLAT_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("x.csv")).unwrap().contains("seed=3"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# survival sweep\ngrid_p = 0.5, 0.9\nhorizon = 8\ntrials = 40\n").unwrap();
    let out = perclat(dir.path(), &["survival", "--config", "run.cfg", "--trials", "30"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("survival.csv")).unwrap();
    assert!(text.contains("trials=30"));
    assert!(text.contains("horizon=8"));
    assert_eq!(data_rows(&text).len(), 2);
}

#[test]
fn validation_errors_exit_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["survival", "--grid-p", "0.5", "--grid-l", "1"],
        &["survival", "--horizon", "5"],
        &["survival", "--grid-p", "1.5"],
        &["phat-sweep", "--grid-l", ""],
        &["martingale", "--p", "0"],
        &["count-paths", "--l", "1", "--p", "0.5"],
        &["critical", "--low", "2", "--high", "1"],
        &["check-measures", "--t", "5"],
        &["check-measures", "--event", "missing.json", "--t", "5", "--amplitude", "1"],
    ];
    for args in cases {
        let out = perclat(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    fs::write(dir.path().join("bad.cfg"), "trials = 5\nunknown_key = 1\n").unwrap();
    let out = perclat(dir.path(), &["phat-sweep", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key") || String::from_utf8_lossy(&out.stderr).contains("unknown-key"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1, "no output on failure");
}

#[test]
fn precondition_error_names_the_inequality() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ev.json"), r#"{"window": 1.0, "dim": 2}"#).unwrap();
    let out = perclat(dir.path(), &["check-measures", "--event", "ev.json", "--t", "3", "--amplitude", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("precondition") && err.contains("L + M"), "{err}");
}

#[test]
fn empty_box_event_passes_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let ev = r#"{"window": 1.0, "constraints": [{"site": [0, 0], "box": [[0.5, 0.2], [0, 1]]}]}"#;
    fs::write(dir.path().join("ev.json"), ev).unwrap();
    let out = perclat(
        dir.path(),
        &["check-measures", "--event", "ev.json", "--t", "5", "--amplitude", "1", "--trials", "200"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("check-measures.json")).unwrap()).unwrap();
    let cmp = &doc["result"]["lemma"]["comparison"];
    assert_eq!(cmp["difference"], 0.0);
    assert_eq!(cmp["pass"], true);
    assert_eq!(doc["schema"], 1);
}

#[test]
fn budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclat(
        dir.path(),
        &["critical", "--axis", "p", "--dstar", "1", "--horizon", "20", "--trials", "1", "--max-trials", "1"],
    );
    assert_eq!(out.status.code(), Some(3));
    fs::write(dir.path().join("ev.json"), r#"{"window": 0.5, "dim": 2}"#).unwrap();
    let out = perclat(
        dir.path(),
        &["check-measures", "--event", "ev.json", "--t", "12", "--amplitude", "1", "--budget", "100"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn critical_p_axis_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclat(
        dir.path(),
        &["critical", "--axis", "p", "--dstar", "1", "--horizon", "30", "--trials", "400", "--max-trials", "6400"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("critical.json")).unwrap()).unwrap();
    let r = &doc["result"];
    let width = r["bracket_high"].as_f64().unwrap() - r["bracket_low"].as_f64().unwrap();
    assert!(width <= 0.05);
    assert!(r["low_estimate"]["ci_high"].as_f64().unwrap() < 0.5);
    assert!(r["high_estimate"]["ci_low"].as_f64().unwrap() > 0.5);
}
