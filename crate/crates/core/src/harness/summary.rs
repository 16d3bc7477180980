use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{Defaults, Hyper, Method};
use super::run::ReplicateRecord;
use crate::data::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::stability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Sensitivity,
    Fdr,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Sensitivity => "sensitivity",
            Measure::Fdr => "fdr",
        }
    }

    fn of(self, r: &ReplicateRecord) -> Option<f64> {
        match self {
            Measure::Sensitivity => r.sensitivity,
            Measure::Fdr => Some(r.fdr),
        }
    }

    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Measure::Sensitivity => a > b,
            Measure::Fdr => a < b,
        }
    }
}

/// Best cell of one hyperparameter against its default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub study: u8,
    pub hyperparam: String,
    pub method: Method,
    pub measure: Measure,
    pub default_value: String,
    pub best_value: String,
    /// `|best - default|`; `None` for non-numeric hyperparameters.
    pub difference: Option<f64>,
    pub measure_at_best: f64,
    pub measure_at_default: f64,
}

/// Mean pairwise Jaccard of the replicate selections of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub study: u8,
    pub hyperparam: String,
    pub value: String,
    pub method: Method,
    pub replicates: usize,
    pub stability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub stability: Vec<StabilityRow>,
}

/// Parses a value label as a number, resolving `1/n` with `n` rows.
pub fn label_number(label: &str, n: usize) -> Option<f64> {
    if label == "1/n" {
        return Some(1.0 / n as f64);
    }
    label.parse().ok()
}

/// Per-cell means, best cells and study-1 stability.
///
/// Cells are compared by their mean over replicates; the default wins exact
/// ties. `n` resolves `1/n` labels when computing differences.
pub fn summarize(records: &[ReplicateRecord], defaults: &Defaults, n: usize) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::Summary("no records to summarize".into()));
    }
    type GroupKey<'a> = (u8, usize, Method);
    let hyper_index = |name: &str| {
        Hyper::ALL
            .iter()
            .position(|h| h.name() == name)
            .ok_or_else(|| Error::Summary(format!("unknown hyperparameter `{name}`")))
    };
    let mut groups: BTreeMap<GroupKey, BTreeMap<&str, Vec<&ReplicateRecord>>> = BTreeMap::new();
    for r in records {
        let h = hyper_index(&r.hyperparam)?;
        groups.entry((r.study, h, r.method)).or_default().entry(&r.value).or_default().push(r);
    }

    let mut rows = Vec::new();
    for (&(study, h, method), cells) in &groups {
        let hyper = Hyper::ALL[h];
        let default_label = defaults.value(hyper)?.label();
        for measure in [Measure::Sensitivity, Measure::Fdr] {
            let means: BTreeMap<&str, f64> = cells
                .iter()
                .filter_map(|(&label, recs)| {
                    let vals: Vec<f64> = recs.iter().filter_map(|r| measure.of(r)).collect();
                    (!vals.is_empty()).then(|| (label, vals.iter().sum::<f64>() / vals.len() as f64))
                })
                .collect();
            let &at_default = means.get(default_label.as_str()).ok_or_else(|| {
                Error::Summary(format!(
                    "study {study}, {hyper}, {method}: no {} for the default cell {default_label}",
                    measure.name()
                ))
            })?;
            let (mut best_label, mut best) = (default_label.as_str(), at_default);
            for (&label, &m) in &means {
                if measure.better(m, best) {
                    (best_label, best) = (label, m);
                }
            }
            let difference = if hyper.is_numeric() {
                let num = |l: &str| {
                    label_number(l, n).ok_or_else(|| Error::Summary(format!("{hyper} value `{l}` is not a number")))
                };
                Some((num(best_label)? - num(&default_label)?).abs())
            } else {
                None
            };
            rows.push(SummaryRow {
                study,
                hyperparam: hyper.name().into(),
                method,
                measure,
                default_value: default_label.clone(),
                best_value: best_label.into(),
                difference,
                measure_at_best: best,
                measure_at_default: at_default,
            });
        }
    }

    let mut stab = Vec::new();
    for (&(study, h, method), cells) in &groups {
        if study != 1 {
            continue;
        }
        for (&label, recs) in cells {
            let sets: Vec<&[usize]> = recs.iter().map(|r| r.selected.as_slice()).collect();
            if let Ok(s) = stability(&sets) {
                stab.push(StabilityRow {
                    study,
                    hyperparam: Hyper::ALL[h].name().into(),
                    value: label.into(),
                    method,
                    replicates: sets.len(),
                    stability: s,
                });
            }
        }
    }
    Ok(Summary { rows, stability: stab })
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "study",
    "hyperparam",
    "method",
    "measure",
    "default_value",
    "best_value",
    "difference",
    "measure_at_best",
    "measure_at_default",
];

/// The summary table as CSV text.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut put = |rec: &[String]| w.write_record(rec).expect("writing to memory");
    put(&SUMMARY_COLUMNS.map(String::from));
    for r in rows {
        put(&[
            r.study.to_string(),
            r.hyperparam.clone(),
            r.method.to_string(),
            r.measure.name().into(),
            r.default_value.clone(),
            r.best_value.clone(),
            r.difference.map(fmt_num).unwrap_or_default(),
            fmt_num(r.measure_at_best),
            fmt_num(r.measure_at_default),
        ]);
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let text = summary_csv(rows);
    write_atomic(path, |f| {
        f.write_all(text.as_bytes())?;
        Ok(())
    })
}

pub fn write_stability_csv(path: &Path, rows: &[StabilityRow]) -> Result<()> {
    write_atomic(path, |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["study", "hyperparam", "value", "method", "replicates", "stability"])?;
        for r in rows {
            w.write_record([
                r.study.to_string(),
                r.hyperparam.clone(),
                r.value.clone(),
                r.method.to_string(),
                r.replicates.to_string(),
                fmt_num(r.stability),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}
