use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Cell, Hyper, Method, SweepConfig};
use crate::data::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::params::HyperParams;
use crate::rng::{derive_seed, Domain};
use crate::selection::{boruta_select, vita_select};
use crate::simgen::{gen_study1, gen_study2, gen_surrogate_expression, ExpressionMatrix, SimulatedReplicate};

pub const RECORDS_FILE: &str = "records.csv";
pub const SELECTIONS_FILE: &str = "selections.csv";
pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const CONFIG_FILE: &str = "config.json";

/// Outcome of one method on one replicate in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub study: u8,
    pub hyperparam: String,
    pub value: String,
    pub method: Method,
    pub replicate: u64,
    pub fdr: f64,
    /// Empty for null replicates.
    pub sensitivity: Option<f64>,
    pub n_selected: usize,
    pub wall_ms: u64,
    /// Selected variable indices, ascending.
    pub selected: Vec<usize>,
}

impl ReplicateRecord {
    fn sort_key(&self) -> (u8, &str, &str, Method, u64) {
        (self.study, &self.hyperparam, &self.value, self.method, self.replicate)
    }

    fn key(&self) -> RecordKey {
        (self.hyperparam.clone(), self.value.clone(), self.method, self.replicate)
    }
}

type RecordKey = (String, String, Method, u64);

pub fn sort_records(records: &mut [ReplicateRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// A validated config with its expression matrix loaded (study 2).
pub struct SweepPlan {
    pub cfg: SweepConfig,
    base: Option<ExpressionMatrix>,
}

/// Cells sharing the same forest settings, computed once.
struct Group {
    cells: Vec<Cell>,
    hp: HyperParams,
}

impl SweepPlan {
    pub fn new(cfg: SweepConfig) -> Result<SweepPlan> {
        cfg.validate()?;
        let base = match cfg.study {
            2 => Some(match &cfg.expression.csv {
                Some(path) => ExpressionMatrix::read_csv(path)?,
                None => gen_surrogate_expression(cfg.expression.samples, cfg.expression.genes, cfg.expression.seed)?,
            }),
            _ => None,
        };
        if let Some(b) = &base {
            if cfg.study2.n_effect > b.genes() {
                return Err(Error::InvalidConfig(format!(
                    "{} effect variables but the expression matrix has {} genes",
                    cfg.study2.n_effect,
                    b.genes()
                )));
            }
        }
        Ok(SweepPlan { cfg, base })
    }

    /// Rows per replicate dataset.
    pub fn n(&self) -> usize {
        match &self.base {
            Some(b) => b.samples(),
            None => self.cfg.study1.n,
        }
    }

    pub fn replicate(&self, replicate_id: u64) -> Result<SimulatedReplicate> {
        match &self.base {
            Some(b) => gen_study2(
                &crate::simgen::Study2Config { seed: self.cfg.seed, ..self.cfg.study2.clone() },
                b,
                replicate_id,
            ),
            None => gen_study1(
                &crate::simgen::Study1Config { seed: self.cfg.seed, ..self.cfg.study1.clone() },
                replicate_id,
            ),
        }
    }

    /// Legal cells, and the labels of skipped illegal ones.
    pub fn cells(&self) -> Result<(Vec<Cell>, Vec<String>)> {
        let mut legal = Vec::new();
        let mut skipped = Vec::new();
        for cell in self.cfg.cells()? {
            if self.cfg.hyperparams(&cell, self.n())?.validate().is_ok() {
                legal.push(cell);
            } else {
                let name = format!("{}={}", cell.hyper, cell.label());
                warn!("skipping illegal cell {name}");
                skipped.push(name);
            }
        }
        Ok((legal, skipped))
    }

    fn groups(&self) -> Result<(Vec<Group>, Vec<String>)> {
        let (cells, skipped) = self.cells()?;
        let mut groups: Vec<Group> = Vec::new();
        for cell in cells {
            let hp = self.cfg.hyperparams(&cell, self.n())?;
            match groups.iter_mut().find(|g| g.hp == hp) {
                Some(g) => g.cells.push(cell),
                None => groups.push(Group { cells: vec![cell], hp }),
            }
        }
        Ok((groups, skipped))
    }

    /// Forest seed of a (method, replicate) pair, shared by all cells.
    fn method_seed(&self, method: Method, replicate_id: u64) -> u64 {
        derive_seed(self.cfg.seed, Domain::Method, replicate_id * 2 + method as u64)
    }

    fn run_method(
        &self,
        data: &SimulatedReplicate,
        hp: &HyperParams,
        method: Method,
        replicate_id: u64,
    ) -> Result<(Vec<usize>, u64)> {
        let start = Instant::now();
        let hp = hp.with_seed(self.method_seed(method, replicate_id));
        let selected = match method {
            Method::Vita => vita_select(&data.data, &hp, self.cfg.vita_alpha)?.selected,
            Method::Boruta => {
                let round_hp = HyperParams { num_trees: self.cfg.boruta_trees_per_round(), ..hp };
                let r = boruta_select(&data.data, &round_hp, self.cfg.boruta.alpha, self.cfg.boruta.max_iter)?;
                if r.trees_grown > self.cfg.boruta_budget() {
                    return Err(Error::InvalidConfig(format!(
                        "boruta grew {} trees, above the budget of {}",
                        r.trees_grown,
                        self.cfg.boruta_budget()
                    )));
                }
                r.confirmed()
            }
        };
        let ms = if self.cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
        Ok((selected, ms))
    }

    fn records_for(
        &self,
        cells: &[Cell],
        method: Method,
        replicate_id: u64,
        data: &SimulatedReplicate,
        selected: Vec<usize>,
        wall_ms: u64,
    ) -> Vec<ReplicateRecord> {
        let truth = data.data.truth().expect("simulated data carry truth");
        let e = evaluate(&selected, truth);
        cells
            .iter()
            .map(|c| ReplicateRecord {
                study: self.cfg.study,
                hyperparam: c.hyper.name().into(),
                value: c.label(),
                method,
                replicate: replicate_id,
                fdr: e.fdr,
                sensitivity: e.sensitivity,
                n_selected: e.n_selected,
                wall_ms,
                selected: selected.clone(),
            })
            .collect()
    }

    /// Runs every requested method on one replicate with the cell's
    /// settings. Deterministic per (seed, cell, replicate).
    pub fn run_cell(&self, cell: &Cell, replicate_id: u64) -> Result<Vec<ReplicateRecord>> {
        let hp = self.cfg.hyperparams(cell, self.n())?;
        hp.validate()?;
        let data = self.replicate(replicate_id)?;
        let mut out = Vec::new();
        for &method in &self.cfg.methods {
            let (selected, ms) = self.run_method(&data, &hp, method, replicate_id)?;
            out.extend(self.records_for(std::slice::from_ref(cell), method, replicate_id, &data, selected, ms));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub workers: usize,
    /// Stop after this many new jobs without writing final tables.
    pub job_limit: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { workers: 1, job_limit: None }
    }
}

#[derive(Debug)]
pub struct SweepReport {
    /// Sorted by (study, hyperparam, value, method, replicate).
    pub records: Vec<ReplicateRecord>,
    pub skipped_cells: Vec<String>,
    pub errors: Vec<String>,
    pub jobs_run: usize,
    pub jobs_resumed: usize,
    /// False when stopped early by `job_limit`.
    pub complete: bool,
}

/// Reads journaled records and cuts a torn final line so that later
/// appends start on a fresh line.
fn journal_read(path: &Path) -> Result<Vec<ReplicateRecord>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        warn!("{}: dropping an incomplete last line", path.display());
        let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        f.set_len(complete as u64).map_err(|e| Error::io(path, e))?;
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(&bytes[..complete]).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match serde_json::from_str::<ReplicateRecord>(&line) {
            Ok(r) => out.push(r),
            Err(_) => warn!("{}: ignoring unreadable line {}", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn prepare_out_dir(cfg: &SweepConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join(CONFIG_FILE);
    let mut stored_cfg = cfg.clone();
    stored_cfg.out = None;
    let text = serde_json::to_string_pretty(&stored_cfg)?;
    match fs::read_to_string(&path) {
        Ok(existing) => {
            let old: SweepConfig = serde_json::from_str(&existing).map_err(|e| Error::parse(&path, e.to_string()))?;
            if old != stored_cfg {
                return Err(Error::InvalidConfig(format!(
                    "{} holds results of a different configuration",
                    out.display()
                )));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => write_atomic(&path, |f| {
            f.write_all(text.as_bytes())?;
            Ok(())
        }),
        Err(e) => Err(Error::io(&path, e)),
    }
}

/// Runs all (cell, method, replicate) jobs on `opts.workers` threads.
///
/// Each finished job is appended to a journal in `out`; a rerun with the
/// same configuration skips journaled records. When all jobs are done the
/// sorted record and selection tables are written.
pub fn sweep(plan: &SweepPlan, out: &Path, opts: SweepOptions) -> Result<SweepReport> {
    prepare_out_dir(&plan.cfg, out)?;
    let journal_path = out.join(JOURNAL_FILE);
    let mut done: BTreeMap<RecordKey, ReplicateRecord> = BTreeMap::new();
    for r in journal_read(&journal_path)? {
        done.insert(r.key(), r);
    }
    let (groups, skipped_cells) = plan.groups()?;

    let mut jobs = Vec::new();
    let mut resumed = 0;
    for (g, group) in groups.iter().enumerate() {
        for &method in &plan.cfg.methods {
            for rep in 0..plan.cfg.n_replicates as u64 {
                let all_done = group
                    .cells
                    .iter()
                    .all(|c| done.contains_key(&(c.hyper.name().to_string(), c.label(), method, rep)));
                if all_done {
                    resumed += 1;
                } else {
                    jobs.push((g, method, rep));
                }
            }
        }
    }
    let limited = opts.job_limit.is_some_and(|l| l < jobs.len());
    if let Some(l) = opts.job_limit {
        jobs.truncate(l);
    }
    info!(
        "sweep: {} groups of cells, {} jobs to run, {} already journaled, {} workers",
        groups.len(),
        jobs.len(),
        resumed,
        opts.workers
    );

    let journal = Mutex::new(
        OpenOptions::new().create(true).append(true).open(&journal_path).map_err(|e| Error::io(&journal_path, e))?,
    );
    let errors = Mutex::new(Vec::new());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let fresh: Vec<ReplicateRecord> = pool.install(|| {
        jobs.par_iter()
            .flat_map_iter(|&(g, method, rep)| {
                let group = &groups[g];
                let result = plan.replicate(rep).and_then(|data| {
                    let (selected, ms) = plan.run_method(&data, &group.hp, method, rep)?;
                    Ok(plan.records_for(&group.cells, method, rep, &data, selected, ms))
                });
                match result {
                    Ok(records) => {
                        let mut lines = String::new();
                        for r in &records {
                            lines.push_str(&serde_json::to_string(r).expect("records serialize"));
                            lines.push('\n');
                        }
                        let mut f = journal.lock().expect("journal lock");
                        if let Err(e) = f.write_all(lines.as_bytes()).and_then(|_| f.flush()) {
                            let msg = format!("{}: {e}", journal_path.display());
                            warn!("{msg}");
                            errors.lock().expect("error lock").push(msg);
                        }
                        records
                    }
                    Err(e) => {
                        let names: Vec<String> =
                            group.cells.iter().map(|c| format!("{}={}", c.hyper, c.label())).collect();
                        let msg = format!("{} replicate {rep} [{}]: {e}", method, names.join(", "));
                        warn!("{msg}");
                        errors.lock().expect("error lock").push(msg);
                        Vec::new()
                    }
                }
            })
            .collect()
    });
    let jobs_run = jobs.len();
    for r in fresh {
        done.insert(r.key(), r);
    }
    let mut records: Vec<ReplicateRecord> = done.into_values().collect();
    sort_records(&mut records);
    let errors = errors.into_inner().expect("error lock");
    if !limited {
        write_records_csv(&out.join(RECORDS_FILE), &records)?;
        write_selections_csv(&out.join(SELECTIONS_FILE), &records)?;
    }
    Ok(SweepReport { records, skipped_cells, errors, jobs_run, jobs_resumed: resumed, complete: !limited })
}

pub const RECORD_COLUMNS: [&str; 9] =
    ["study", "hyperparam", "value", "method", "replicate", "fdr", "sensitivity", "n_selected", "wall_ms"];

pub fn write_records_csv(path: &Path, records: &[ReplicateRecord]) -> Result<()> {
    write_atomic(path, |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(RECORD_COLUMNS)?;
        for r in records {
            w.write_record([
                r.study.to_string(),
                r.hyperparam.clone(),
                r.value.clone(),
                r.method.to_string(),
                r.replicate.to_string(),
                format!("{:?}", r.fdr),
                r.sensitivity.map(|s| format!("{s:?}")).unwrap_or_default(),
                r.n_selected.to_string(),
                r.wall_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn write_selections_csv(path: &Path, records: &[ReplicateRecord]) -> Result<()> {
    write_atomic(path, |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["study", "hyperparam", "value", "method", "replicate", "selected"])?;
        for r in records {
            let sel: Vec<String> = r.selected.iter().map(|j| j.to_string()).collect();
            w.write_record([
                r.study.to_string(),
                r.hyperparam.clone(),
                r.value.clone(),
                r.method.to_string(),
                r.replicate.to_string(),
                sel.join(" "),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, path: &Path, line: usize) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| Error::parse(path, format!("line {line}: missing column {}", i + 1)))
}

fn num<T: std::str::FromStr>(s: &str, path: &Path, line: usize, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::parse(path, format!("line {line}: bad {what} `{s}`")))
}

/// Reads `records.csv` and, when present next to it, `selections.csv`.
pub fn read_records(path: &Path) -> Result<Vec<ReplicateRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = rdr.headers().map_err(|e| Error::csv(path, e))?.iter().map(String::from).collect();
    if header != RECORD_COLUMNS {
        return Err(Error::parse(path, format!("expected columns {}", RECORD_COLUMNS.join(","))));
    }
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let f = |c| field(&rec, c, path, line);
        let sens = f(6)?;
        records.push(ReplicateRecord {
            study: num(f(0)?, path, line, "study")?,
            hyperparam: Hyper::parse(f(1)?).map_err(|e| Error::parse(path, format!("line {line}: {e}")))?.name().into(),
            value: f(2)?.to_string(),
            method: Method::parse(f(3)?).map_err(|e| Error::parse(path, format!("line {line}: {e}")))?,
            replicate: num(f(4)?, path, line, "replicate")?,
            fdr: num(f(5)?, path, line, "fdr")?,
            sensitivity: if sens.is_empty() { None } else { Some(num(sens, path, line, "sensitivity")?) },
            n_selected: num(f(7)?, path, line, "n_selected")?,
            wall_ms: num(f(8)?, path, line, "wall_ms")?,
            selected: Vec::new(),
        });
    }
    let sel_path = path.with_file_name(SELECTIONS_FILE);
    if sel_path.exists() {
        let mut by_key: BTreeMap<RecordKey, Vec<usize>> = BTreeMap::new();
        let mut rdr = csv::Reader::from_path(&sel_path).map_err(|e| Error::csv(&sel_path, e))?;
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::csv(&sel_path, e))?;
            let f = |c| field(&rec, c, &sel_path, line);
            let selected = f(5)?
                .split_whitespace()
                .map(|s| num(s, &sel_path, line, "variable index"))
                .collect::<Result<Vec<usize>>>()?;
            let key = (
                f(1)?.to_string(),
                f(2)?.to_string(),
                Method::parse(f(3)?).map_err(|e| Error::parse(&sel_path, format!("line {line}: {e}")))?,
                num(f(4)?, &sel_path, line, "replicate")?,
            );
            by_key.insert(key, selected);
        }
        for r in &mut records {
            if let Some(s) = by_key.remove(&r.key()) {
                r.selected = s;
            }
        }
    }
    Ok(records)
}

/// `out/records.csv` for a sweep output directory.
pub fn records_path(dir: &Path) -> PathBuf {
    dir.join(RECORDS_FILE)
}

/// Keys present in `records`, for checking completeness.
pub fn record_keys(records: &[ReplicateRecord]) -> HashSet<(String, String, Method, u64)> {
    records.iter().map(ReplicateRecord::key).collect()
}
