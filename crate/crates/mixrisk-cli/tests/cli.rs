//! End-to-end tests of the `mixrisk` binary: exit codes, report shapes,
//! convention handling, and byte-level determinism of the JSON output.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mixrisk");

const MODEL: &str = r#"{
  "dimension": 2,
  "components": [
    {
      "weight": 0.4,
      "mean": [0.0, 0.0],
      "scale": [[1.0, 0.2], [0.2, 1.0]],
      "generator": { "type": "student-t", "nu": 4.0 }
    },
    {
      "weight": 0.6,
      "mean": [0.0, 0.0],
      "scale": [[1.0, 0.2], [0.2, 1.0]],
      "generator": { "type": "normal" }
    }
  ],
  "portfolio": { "delta": [1.0, -0.5] }
}"#;

const SINGLE_T3: &str = r#"{
  "dimension": 1,
  "components": [
    {
      "weight": 1.0,
      "mean": [0.0],
      "scale": [[1.0]],
      "generator": { "type": "student-t", "nu": 3.0 }
    }
  ],
  "portfolio": { "delta": [1.0] }
}"#;

const AGGREGATE: &str = r#"{
  "components": [
    { "weight": 0.3, "generator": { "type": "student-t", "nu": 5.0 } },
    { "weight": 0.7, "generator": { "type": "normal" } }
  ],
  "market1": { "delta": [1.0, 2.0], "scale": [[1.0, 0.1], [0.1, 1.5]] },
  "market2": { "delta": [0.5], "scale": [[2.0]] },
  "cross_scale": [[0.3], [0.2]]
}"#;

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn var_reports_positive_loss_with_convention_string() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let out = run(&["var", "--input", &model, "--alpha", "0.01"]);
    let doc = stdout_json(&out);
    let r = &doc["results"][0];
    assert_eq!(r["alpha"], 0.01);
    assert!(r["var"].as_f64().unwrap() > 0.0);
    assert!(r["es"].is_null());
    assert_eq!(
        r["convention"]["loss_sign"],
        "VaR/ES reported as positive currency losses"
    );
    assert!(r["quantile"]["q_alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn es_includes_var_and_doubles_under_published_convention() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let validated = stdout_json(&run(&["es", "--input", &model, "--alpha", "0.01"]));
    let published = stdout_json(&run(&[
        "es",
        "--input",
        &model,
        "--alpha",
        "0.01",
        "--es-convention",
        "as-published",
    ]));
    let (v, p) = (&validated["results"][0], &published["results"][0]);
    let es_v = v["es"].as_f64().unwrap();
    let es_p = p["es"].as_f64().unwrap();
    assert!(es_v > v["var"].as_f64().unwrap());
    // zero-mean portfolio: the published coefficient is exactly twice the
    // validated one, so the ES doubles with it
    assert!((es_p / es_v - 2.0).abs() < 1e-15);
    assert_eq!(v["var"], p["var"]);
}

#[test]
fn quantile_matches_the_single_student_value() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "t3.json", SINGLE_T3);
    let out = run(&["quantile", "--input", &model, "--alpha", "0.01"]);
    let doc = stdout_json(&out);
    let q = doc["results"][0]["solution"]["q_alpha"].as_f64().unwrap();
    assert!((q - 4.540702858471386).abs() < 1e-9);
}

#[test]
fn repeated_runs_emit_byte_identical_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let args = [
        "mc-check", "--input", &model, "--alpha", "0.05", "--draws", "20000", "--seed", "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let c = run(&["es", "--input", &model, "--alpha", "0.01", "--alpha", "0.05"]);
    let d = run(&["es", "--input", &model, "--alpha", "0.01", "--alpha", "0.05"]);
    assert!(c.status.success());
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn tables_pass_on_required_cells() {
    let out = run(&["tables", "--alpha", "0.01"]);
    let doc = stdout_json(&out);
    let tables = doc["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 2); // quantile + ES-coefficient table at 0.01
    for t in tables {
        assert_eq!(t["alpha"], 0.01);
    }
    assert!(tables
        .iter()
        .all(|t| t["required_all_pass"].as_bool().unwrap()));
    assert!(doc["summary"].as_str().unwrap().contains("match-required"));
}

#[test]
fn tables_csv_has_a_row_per_cell() {
    let out = run(&["tables", "--alpha", "0.001", "--format", "csv"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].starts_with("table,alpha,beta,nu1,nu2,"));
    // one header + 7x8 quantile cells + 6x5 ES cells
    assert_eq!(lines.len(), 1 + 56 + 30);
    // summary goes to stderr in CSV mode
    assert!(String::from_utf8_lossy(&out.stderr).contains("reproduction report"));
}

#[test]
fn mc_check_agrees_with_the_analytic_engine() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let dump = dir.path().join("batch.bin");
    let out = run(&[
        "mc-check",
        "--input",
        &model,
        "--alpha",
        "0.05",
        "--draws",
        "50000",
        "--seed",
        "3",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], true);
    let z = &doc["results"][0]["z_scores"];
    assert!(z["var"].as_f64().unwrap().abs() <= 3.0);
    assert!(z["es"].as_f64().unwrap().abs() <= 3.0);
    // dumped batch: 32-byte header + 50000 little-endian f64 values
    assert_eq!(std::fs::metadata(&dump).unwrap().len(), 32 + 50_000 * 8);
}

#[test]
fn aggregate_reports_both_markets_and_the_combined_figures() {
    let dir = tempfile::tempdir().unwrap();
    let agg = write(dir.path(), "agg.json", AGGREGATE);
    let out = run(&["aggregate", "--input", &agg, "--alpha", "0.01"]);
    let doc = stdout_json(&out);
    let v1 = doc["market1"]["var"].as_f64().unwrap();
    let v2 = doc["market2"]["var"].as_f64().unwrap();
    let va = doc["aggregated"]["var"].as_f64().unwrap();
    assert!(va > v1.max(v2) && va <= v1 + v2 + 1e-12);
    let phi = doc["aggregated"]["implied_var_correlation"].as_f64().unwrap();
    assert!(phi.abs() <= 1.0);
    assert!(doc["aggregated"]["es"].as_f64().unwrap() > va);
}

#[test]
fn aggregate_csv_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let agg = write(dir.path(), "agg.json", AGGREGATE);
    let out = run(&["aggregate", "--input", &agg, "--alpha", "0.01", "--format", "csv"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("alpha,q_alpha,es_multiplier,cross,"));
    assert_eq!(lines[1].split(',').count(), 12);
}

#[test]
fn invalid_model_exits_two_and_names_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = MODEL.replace("\"weight\": 0.4", "\"weight\": 0.5");
    let model = write(dir.path(), "bad.json", &bad);
    let out = run(&["var", "--input", &model]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("weight"), "stderr: {stderr}");
}

#[test]
fn missing_input_exits_two_and_names_the_path() {
    let out = run(&["var", "--input", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/model.json"));
}

#[test]
fn small_draw_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let out = run(&["mc-check", "--input", &model, "--draws", "5000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("10000"));
}

#[test]
fn bad_thread_env_exits_two() {
    let out = Command::new(BIN)
        .args(["tables", "--alpha", "0.01"])
        .env("MIXRISK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MIXRISK_THREADS"));
}

#[test]
fn thread_cap_of_one_still_reproduces_the_seeded_batch() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let args = [
        "mc-check", "--input", &model, "--alpha", "0.05", "--draws", "20000", "--seed", "11",
    ];
    let parallel = run(&args);
    let serial = Command::new(BIN)
        .args(args)
        .env("MIXRISK_THREADS", "1")
        .output()
        .unwrap();
    assert!(parallel.status.success() && serial.status.success());
    assert_eq!(parallel.stdout, serial.stdout);
}
