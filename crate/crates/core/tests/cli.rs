use std::path::Path;
use std::process::{Command, Output};

fn ossb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ossb"))
        .args(args)
        .env_remove("OSSB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_bound_gaussian_pair() {
    let o = ossb(&[
        "solve-bound",
        "--instance",
        r#"{"structure": {"kind": "classical", "arms": 2}, "model": "gaussian", "theta": [0, 1]}"#,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 2.0);
    assert_eq!(v["rates"], serde_json::json!([2.0, 0.0]));
    assert_eq!(v["status"], "exact");
}

#[test]
fn solve_bound_from_config_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/bound_linear.json");
    let o = ossb(&["solve-bound", "--config", path]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 4.0).abs() < 1e-3);
}

#[test]
fn solve_bound_reports_ties_without_failing() {
    let o = ossb(&[
        "solve-bound",
        "--instance",
        r#"{"structure": {"kind": "classical", "arms": 3}, "model": "bernoulli", "theta": [0.5, 0.5, 0.2]}"#,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "degenerate");
    assert_eq!(v["flags"][0]["flag"], "tie");
}

#[test]
fn solve_bound_missing_theta_is_a_usage_error() {
    let o = ossb(&[
        "solve-bound",
        "--instance",
        r#"{"structure": {"kind": "classical", "arms": 2}, "model": "gaussian"}"#,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));
}

const TINY_RUN: &str = r#"{
    "instances": {"source": "explicit", "list": [
        {"structure": {"kind": "classical", "arms": 2}, "model": "bernoulli", "theta": [0.5, 0.6]}
    ]},
    "policies": [{"name": "ossb"}],
    "horizon": 10,
    "n_trials": 1,
    "base_seed": 3,
    "checkpoints": "every"
}"#;

#[test]
fn run_writes_one_trace_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", TINY_RUN);
    let out = dir.path().join("out");
    let o = ossb(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("seed: 3"));

    let mut traces = csv::Reader::from_path(out.join("traces.csv")).unwrap();
    assert_eq!(
        traces.headers().unwrap().iter().collect::<Vec<_>>(),
        ["policy", "instance_id", "trial", "round", "cum_regret", "phase"]
    );
    let rows: Vec<csv::StringRecord> = traces.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(&rows[9][3], "10");

    let mut agg = csv::Reader::from_path(out.join("aggregate.csv")).unwrap();
    assert_eq!(
        agg.headers().unwrap().iter().collect::<Vec<_>>(),
        ["policy", "round", "mean", "stderr", "ci95", "n"]
    );
    assert_eq!(agg.records().count(), 10);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["base_seed"], 3);
}

#[test]
fn run_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        &TINY_RUN
            .replace("\"horizon\": 10", "\"horizon\": 300")
            .replace("\"n_trials\": 1", "\"n_trials\": 6")
            .replace("[{\"name\": \"ossb\"}]", "[{\"name\": \"ossb\"}, {\"name\": \"klucb\"}]"),
    );
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("out{workers}"));
        let o = ossb(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--parallelism", workers, "--seed", "11"]);
        assert!(o.status.success());
        outputs.push((
            std::fs::read(out.join("traces.csv")).unwrap(),
            std::fs::read(out.join("aggregate.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn run_rejects_epsilon_zero_without_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &TINY_RUN.replace("{\"name\": \"ossb\"}", "{\"name\": \"ossb\", \"epsilon\": 0}"));
    let out = dir.path().join("out");
    let o = ossb(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = ossb(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--allow-epsilon-zero"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_uses_the_environment_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", TINY_RUN);
    let env_out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_ossb"))
        .args(["run", "--config", &cfg])
        .env("OSSB_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("aggregate.csv").exists());
}

#[test]
fn selfcheck_passes_and_fails_when_forced() {
    let o = ossb(&["selfcheck"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = ossb(&["selfcheck", "--tolerance-scale", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}
