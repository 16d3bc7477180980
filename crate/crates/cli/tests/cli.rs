use std::path::Path;
use std::process::{Command, Output};

use rfselect::simgen::{gen_study1, Study1Config};
use rfselect::Dataset;

fn rfselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfselect")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = rfselect(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SMALL_STUDY1: &str = r#"{"k": 5, "p": 80, "n": 60}"#;

#[test]
fn simulate_then_select_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s1.json");
    write(&cfg, SMALL_STUDY1);
    let data = dir.path().join("d.csv");
    let (cfg_s, data_s) = (cfg.to_str().unwrap(), data.to_str().unwrap());
    ok(&["--quiet", "simulate", "--study", "1", "--config", cfg_s, "--replicate", "3", "--seed", "7", "--out", data_s]);

    let want = gen_study1(&Study1Config { k: 5, p: 80, n: 60, seed: 7, ..Default::default() }, 3).unwrap();
    let got = Dataset::read_csv(&data).unwrap().attach_truth_file(dir.path().join("d.truth")).unwrap();
    assert_eq!(got, want.data);

    let truth = dir.path().join("d.truth");
    let args = [
        "select",
        "--method",
        "vita",
        "--data",
        data_s,
        "--truth",
        truth.to_str().unwrap(),
        "--seed",
        "7",
        "--num-trees",
        "200",
        "--mtry-prop",
        "0.1",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["method"], "vita");
    assert_eq!(v["variables"].as_array().unwrap().len(), 80);
    assert!(v["evaluation"]["fdr"].is_number());
    assert_eq!(v["hyperparams"]["seed"], 7);
    assert_eq!(v["hyperparams"]["min_node_size_prop"], 1.0 / 60.0);
}

#[test]
fn boruta_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let cfg = dir.path().join("s1.json");
    write(&cfg, SMALL_STUDY1);
    ok(&["--quiet", "simulate", "--study", "1", "--config", cfg.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let report = dir.path().join("r.json");
    let stdout = ok(&[
        "--quiet",
        "--threads",
        "2",
        "select",
        "--method",
        "boruta",
        "--data",
        data.to_str().unwrap(),
        "--num-trees",
        "50",
        "--max-iter",
        "8",
        "--mtry-prop",
        "0.2",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["method"], "boruta");
    assert!(v["iterations_run"].as_u64().unwrap() <= 8);
    assert!(v["variables"][0]["decision"].is_string());
    assert!(v.get("evaluation").is_none());
    assert!(!dir.path().join("r.json.tmp").exists());
}

#[test]
fn simulate_study2_on_a_small_surrogate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s2.json");
    write(&cfg, r#"{"n_effect": 16}"#);
    let data = dir.path().join("d.csv");
    ok(&[
        "--quiet",
        "simulate",
        "--study",
        "2",
        "--config",
        cfg.to_str().unwrap(),
        "--surrogate",
        "30x40",
        "--out",
        data.to_str().unwrap(),
    ]);
    let d = Dataset::read_csv(&data).unwrap().attach_truth_file(dir.path().join("d.truth")).unwrap();
    assert_eq!((d.n(), d.p()), (30, 40));
    assert_eq!(d.truth_indices().unwrap().len(), 16);
}

#[test]
fn missing_data_file_names_the_path() {
    let out = rfselect(&["select", "--method", "vita", "--data", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/data.csv"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rfselect(&["select", "--method", "vita", "--data", "x.csv", "--bogus"]).status.code(), Some(2));
    assert_eq!(rfselect(&["simulate", "--study", "3", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(rfselect(&["sweep", "--workers", "2"]).status.code(), Some(2));
    assert_eq!(rfselect(&[]).status.code(), Some(2));
}

#[test]
fn illegal_settings_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write(&data, "y,a\n0,1\n1,2\n0,3\n1,4\n");
    let out = rfselect(&[
        "select",
        "--method",
        "vita",
        "--data",
        data.to_str().unwrap(),
        "--replace",
        "false",
        "--sample-fraction",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(rfselect(&["sweep", "--profile", "no-such-profile", "--out", "x"]).status.code(), Some(1));
}

#[test]
fn sweep_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    write(
        &cfg,
        r#"{
            "study": 1,
            "study1": {"k": 5, "p": 60, "n": 60},
            "grids": {"mtry_prop": [0.014, 0.3], "replace": [true, false], "sample_fraction": [0.632, 1.0],
                      "min_node_size_prop": [0.05, "1/n"]},
            "n_replicates": 2,
            "total_trees": 30,
            "boruta": {"trees_per_round": 20, "max_iter": 6}
        }"#,
    );
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let log = rfselect(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "2", "--out", out_s, "--seed", "3"]);
    assert!(log.status.success());
    let stderr = String::from_utf8_lossy(&log.stderr);
    assert!(stderr.contains("sweep config") && stderr.contains("\"seed\":3"), "{stderr}");
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 8 * 2 * 2);

    let summary = ok(&["--quiet", "summarize", "--in", out_s]);
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "study,hyperparam,method,measure,default_value,best_value,difference,measure_at_best,measure_at_default"
    );
    assert_eq!(lines.count(), 4 * 2 * 2);
    let stab = dir.path().join("stab.csv");
    let file = dir.path().join("summary.csv");
    ok(&[
        "--quiet",
        "summarize",
        "--in",
        out_s,
        "--out",
        file.to_str().unwrap(),
        "--stability",
        stab.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&file).unwrap(), summary);
    assert_eq!(std::fs::read_to_string(&stab).unwrap().lines().count(), 1 + 8 * 2);

    // Resuming a finished sweep runs nothing and leaves the table unchanged.
    ok(&["--quiet", "sweep", "--config", cfg.to_str().unwrap(), "--out", out_s, "--seed", "3"]);
    assert_eq!(std::fs::read_to_string(out.join("records.csv")).unwrap(), records);
}

#[test]
fn metrics_of_names() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("t.txt");
    write(&truth, "a\nb\n");
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["metrics", "--truth", truth.to_str().unwrap(), "--selected", "a,c,d"])).unwrap();
    assert_eq!(v["evaluation"]["fdr"], 2.0 / 3.0);
    assert_eq!(v["evaluation"]["sensitivity"], 0.5);
    let sel = dir.path().join("sel.txt");
    write(&sel, "1 2\n1,2\n1\n");
    let v: serde_json::Value = serde_json::from_str(&ok(&["metrics", "--selections", sel.to_str().unwrap()])).unwrap();
    assert_eq!(v["stability"], 2.0 / 3.0);
    assert_eq!(rfselect(&["metrics"]).status.code(), Some(1));
}
