use std::fs;
use std::io::Write;

use rfselect::harness::*;
use rfselect::simgen::Study1Config;
use rfselect::Error;

fn tiny() -> SweepConfig {
    let mut cfg = SweepConfig::desk_study1(5);
    cfg.study1 = Study1Config { k: 5, p: 60, n: 60, ..Default::default() };
    cfg.grids.mtry_prop = vec![0.014, 0.2];
    cfg.grids.sample_fraction = vec![0.4, 0.632, 1.0];
    cfg.n_replicates = 3;
    cfg.total_trees = 40;
    cfg.boruta.trees_per_round = Some(30);
    cfg.boruta.max_iter = 8;
    cfg
}

fn run(cfg: &SweepConfig, dir: &std::path::Path, workers: usize) -> SweepReport {
    let plan = SweepPlan::new(cfg.clone()).unwrap();
    sweep(&plan, dir, SweepOptions { workers, job_limit: None }).unwrap()
}

#[test]
fn sixteen_cells_when_the_default_forbids_one() {
    let mut cfg = SweepConfig::desk_study1(10);
    cfg.defaults.replace = false;
    let plan = SweepPlan::new(cfg).unwrap();
    let (cells, skipped) = plan.cells().unwrap();
    assert_eq!(cells.len(), 16);
    assert_eq!(skipped, ["sample.fraction=1.0"]);
}

#[test]
fn full_grid_cell_count_with_replace_default() {
    let plan = SweepPlan::new(SweepConfig::desk_study1(10)).unwrap();
    let (cells, skipped) = plan.cells().unwrap();
    assert_eq!((cells.len(), skipped.len()), (17, 0));
}

#[test]
fn run_cell_is_deterministic_and_matches_sweep() {
    let cfg = tiny();
    let plan = SweepPlan::new(cfg.clone()).unwrap();
    let cell = Cell { hyper: Hyper::MtryProp, value: CellValue::Num(0.2) };
    let a = plan.run_cell(&cell, 1).unwrap();
    assert_eq!(a, plan.run_cell(&cell, 1).unwrap());
    assert_eq!(a.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path(), 1);
    for r in &a {
        assert!(report.records.contains(r), "{r:?}");
    }
}

#[test]
fn records_for_every_label_and_method() {
    let cfg = tiny();
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path(), 2);
    let labels = cfg.cells().unwrap().len();
    assert_eq!(report.records.len(), labels * 2 * 3);
    assert!(report.errors.is_empty() && report.complete);
    // 1/n = 0.0166... differs from 0.01 at n = 60, so every min.node label is its own cell.
    assert_eq!(labels, 2 + 2 + 3 + 5);
    let back = read_records(&records_path(dir.path())).unwrap();
    assert_eq!(back, report.records);
    let header = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert!(header.starts_with("study,hyperparam,value,method,replicate,fdr,sensitivity,n_selected,wall_ms\n"));
}

#[test]
fn worker_count_does_not_change_records() {
    let cfg = tiny();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, a.path(), 1);
    run(&cfg, b.path(), 4);
    for f in [RECORDS_FILE, SELECTIONS_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn resume_after_interruption_gives_the_same_table() {
    let cfg = tiny();
    let full = tempfile::tempdir().unwrap();
    run(&cfg, full.path(), 1);

    let dir = tempfile::tempdir().unwrap();
    let plan = SweepPlan::new(cfg.clone()).unwrap();
    let partial = sweep(&plan, dir.path(), SweepOptions { workers: 2, job_limit: Some(7) }).unwrap();
    assert!(!partial.complete);
    assert!(!dir.path().join(RECORDS_FILE).exists());
    // A kill mid-append leaves a torn line.
    let mut j = fs::OpenOptions::new().append(true).open(dir.path().join(JOURNAL_FILE)).unwrap();
    j.write_all(b"{\"study\":1,\"hyperp").unwrap();
    drop(j);

    let rest = sweep(&plan, dir.path(), SweepOptions { workers: 3, job_limit: None }).unwrap();
    assert_eq!(rest.jobs_resumed, 7);
    assert!(rest.complete);
    assert_eq!(fs::read(full.path().join(RECORDS_FILE)).unwrap(), fs::read(dir.path().join(RECORDS_FILE)).unwrap());

    let again = sweep(&plan, dir.path(), SweepOptions::default()).unwrap();
    assert_eq!(again.jobs_run, 0);
}

#[test]
fn resume_refuses_a_different_config() {
    let cfg = tiny();
    let dir = tempfile::tempdir().unwrap();
    run(&SweepConfig { n_replicates: 1, ..cfg.clone() }, dir.path(), 1);
    let plan = SweepPlan::new(SweepConfig { seed: 99, ..cfg }).unwrap();
    let err = sweep(&plan, dir.path(), SweepOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidConfig(_)));
}

#[test]
fn zero_replicates_is_an_empty_table() {
    let cfg = SweepConfig { n_replicates: 0, ..tiny() };
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path(), 1);
    assert!(report.records.is_empty());
    let text = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn summary_from_csv_matches_memory() {
    let cfg = tiny();
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path(), 1);
    let mem = summarize(&report.records, &cfg.defaults, 60).unwrap();
    let disk = summarize(&read_records(&records_path(dir.path())).unwrap(), &cfg.defaults, 60).unwrap();
    assert_eq!(mem, disk);
    assert_eq!(mem.rows.len(), 4 * 2 * 2);
    assert_eq!(mem.stability.len(), 12 * 2);
    for r in &mem.rows {
        assert_eq!(
            r.difference == Some(0.0) || r.difference.is_none() && r.best_value == r.default_value,
            r.best_value == r.default_value
        );
    }
}

#[test]
fn study2_surrogate_sweep() {
    let mut cfg = SweepConfig::desk_study2();
    cfg.expression.samples = 40;
    cfg.expression.genes = 50;
    cfg.study2.n_effect = 8;
    cfg.grids.mtry_prop = vec![0.014];
    cfg.grids.sample_fraction = vec![0.632];
    cfg.grids.min_node_size_prop = vec![NodeSizeProp::per_observation()];
    cfg.methods = vec![Method::Vita];
    cfg.n_replicates = 2;
    cfg.total_trees = 30;
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path(), 1);
    assert_eq!(report.records.len(), 5 * 2);
    assert!(report.records.iter().all(|r| r.study == 2 && r.sensitivity.is_some()));

    cfg.study2.n_effect = 51;
    assert!(SweepPlan::new(cfg).is_err());
}
