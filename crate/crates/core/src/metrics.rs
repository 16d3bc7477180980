//! FDR, sensitivity and Jaccard stability of selected variable sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub fdr: f64,
    /// `None` when the truth mask is empty.
    pub sensitivity: Option<f64>,
    pub n_selected: usize,
    pub n_true: usize,
}

fn count_true(selected: &[usize], truth: &[bool]) -> usize {
    let set: BTreeSet<usize> = selected.iter().copied().collect();
    set.iter().filter(|&&j| truth.get(j).copied().unwrap_or(false)).count()
}

fn distinct(selected: &[usize]) -> usize {
    selected.iter().collect::<BTreeSet<_>>().len()
}

/// Share of selected variables that are noise; 0 for an empty selection.
pub fn fdr(selected: &[usize], truth: &[bool]) -> f64 {
    let n = distinct(selected);
    if n == 0 {
        return 0.0;
    }
    (n - count_true(selected, truth)) as f64 / n as f64
}

/// Share of true variables that were selected.
pub fn sensitivity(selected: &[usize], truth: &[bool]) -> Result<f64> {
    let n_true = truth.iter().filter(|&&t| t).count();
    if n_true == 0 {
        return Err(Error::UndefinedMeasure("sensitivity with no true variables".into()));
    }
    Ok(count_true(selected, truth) as f64 / n_true as f64)
}

pub fn evaluate(selected: &[usize], truth: &[bool]) -> EvalRecord {
    EvalRecord {
        fdr: fdr(selected, truth),
        sensitivity: sensitivity(selected, truth).ok(),
        n_selected: distinct(selected),
        n_true: truth.iter().filter(|&&t| t).count(),
    }
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets give 1.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let a: BTreeSet<usize> = a.iter().copied().collect();
    let b: BTreeSet<usize> = b.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Mean Jaccard index over all unordered pairs of selections.
pub fn stability<S: AsRef<[usize]>>(selections: &[S]) -> Result<f64> {
    let r = selections.len();
    if r < 2 {
        return Err(Error::Domain(format!("stability needs at least 2 selections, got {r}")));
    }
    let mut sum = 0.0;
    for i in 0..r {
        for j in i + 1..r {
            sum += jaccard(selections[i].as_ref(), selections[j].as_ref());
        }
    }
    Ok(sum / (r * (r - 1) / 2) as f64)
}
