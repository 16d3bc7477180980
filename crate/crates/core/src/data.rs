//! Numeric predictor matrix with a binary response.
//!
//! Interchange format is CSV with a header row: a column named `y` holds the
//! 0/1 response and every other column is a numeric predictor. Ground truth
//! travels in a sidecar file listing one effect-variable name per line.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const RESPONSE_COLUMN: &str = "y";

/// Column-major predictor matrix plus labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    y: Vec<u8>,
    names: Vec<String>,
    truth: Option<Vec<bool>>,
}

impl Dataset {
    /// Builds a dataset from predictor columns (each of length `n`).
    pub fn new(columns: Vec<Vec<f64>>, y: Vec<u8>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 observations, got {n}")));
        }
        if columns.is_empty() {
            return Err(Error::InvalidData("need at least one predictor".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!("{} names for {} predictors", names.len(), columns.len())));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidData(format!("response value {bad} is not 0/1")));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!("column `{name}` has {} values, expected {n}", col.len())));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!("column `{name}` has non-finite values")));
            }
        }
        Ok(Dataset { columns, y, names, truth: None })
    }

    /// Builds a dataset with generated names `x1..xp`.
    pub fn from_columns(columns: Vec<Vec<f64>>, y: Vec<u8>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("x{j}")).collect();
        Self::new(columns, y, names)
    }

    pub fn with_truth(mut self, truth: Vec<bool>) -> Result<Self> {
        if truth.len() != self.p() {
            return Err(Error::InvalidData(format!("truth mask has {} entries, expected {}", truth.len(), self.p())));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.truth.as_deref()
    }

    /// Indices of the ground-truth effect variables, if known.
    pub fn truth_indices(&self) -> Option<Vec<usize>> {
        self.truth.as_ref().map(|t| t.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&v| v == 1).count();
        [self.n() - ones, ones]
    }

    pub fn has_both_classes(&self) -> bool {
        let [zeros, ones] = self.class_counts();
        zeros > 0 && ones > 0
    }

    /// Predictor subset in the given order; response and names follow.
    pub fn select_columns(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            y: self.y.clone(),
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            truth: self.truth.as_ref().map(|t| idx.iter().map(|&j| t[j]).collect()),
        }
    }

    pub(crate) fn from_parts_unchecked(
        columns: Vec<Vec<f64>>,
        y: Vec<u8>,
        names: Vec<String>,
        truth: Option<Vec<bool>>,
    ) -> Dataset {
        Dataset { columns, y, names, truth }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
        let y_pos = header
            .iter()
            .position(|h| h == RESPONSE_COLUMN)
            .ok_or_else(|| Error::parse(path, "no `y` column in header"))?;
        let names: Vec<String> =
            header.iter().enumerate().filter(|&(i, _)| i != y_pos).map(|(_, h)| h.to_string()).collect();
        let mut columns = vec![Vec::new(); names.len()];
        let mut y = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let line = row + 2;
            let mut c = 0;
            for (i, field) in rec.iter().enumerate() {
                let field = field.trim();
                if i == y_pos {
                    let v = match field {
                        "0" => 0,
                        "1" => 1,
                        other => return Err(Error::parse(path, format!("line {line}: response `{other}` is not 0/1"))),
                    };
                    y.push(v);
                } else {
                    let v: f64 = field.parse().map_err(|_| {
                        Error::parse(path, format!("line {line}: `{field}` in column `{}` is not a number", names[c]))
                    })?;
                    columns[c].push(v);
                    c += 1;
                }
            }
        }
        Dataset::new(columns, y, names).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Writes the CSV with `y` as the first column. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_atomic(path, |out| {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec![RESPONSE_COLUMN.to_string()];
            header.extend(self.names.iter().cloned());
            w.write_record(&header)?;
            let mut rec = Vec::with_capacity(self.p() + 1);
            for i in 0..self.n() {
                rec.clear();
                rec.push(self.y[i].to_string());
                rec.extend(self.columns.iter().map(|c| format!("{:?}", c[i])));
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    /// Reads a truth sidecar and attaches the mask.
    pub fn attach_truth_file(self, path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let index: HashMap<&str, usize> = self.names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
        let mut mask = vec![false; self.p()];
        for name in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let j = index.get(name).ok_or_else(|| Error::parse(path, format!("unknown variable `{name}`")))?;
            mask[*j] = true;
        }
        self.with_truth(mask)
    }

    pub fn write_truth_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let names: Vec<&str> = match &self.truth {
            Some(t) => self.names.iter().zip(t).filter(|(_, &b)| b).map(|(n, _)| n.as_str()).collect(),
            None => Vec::new(),
        };
        write_atomic(path, |out| {
            for n in names {
                writeln!(out, "{n}")?;
            }
            Ok(())
        })
    }
}

/// Writes through `<path>.tmp` and renames into place.
pub fn write_atomic<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut fs::File) -> std::result::Result<(), Box<dyn std::error::Error>>,
{
    let tmp = tmp_path(path);
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    if let Err(e) = f(&mut file) {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, std::io::Error::other(e.to_string())));
    }
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn tmp_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".tmp");
    s.into()
}
