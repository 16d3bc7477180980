use serde::Serialize;

use super::require_both_classes;
use super::stats::{bh_adjust, empirical_pvalues_sorted, mirrored_null};
use crate::data::Dataset;
use crate::error::Result;
use crate::forest::{forest_importance, ImportanceReport};
use crate::params::HyperParams;

pub const DEFAULT_VITA_ALPHA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VitaResult {
    pub importance: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// Ascending variable indices with `adjusted <= alpha`.
    pub selected: Vec<usize>,
    pub alpha: f64,
    pub null_size: usize,
}

impl VitaResult {
    /// Re-thresholds the same adjusted p-values at another level.
    pub fn at_alpha(&self, alpha: f64) -> Vec<usize> {
        select_at(&self.adjusted, alpha)
    }
}

fn select_at(adjusted: &[f64], alpha: f64) -> Vec<usize> {
    adjusted.iter().enumerate().filter(|(_, &a)| a <= alpha).map(|(j, _)| j).collect()
}

/// Vita testing on a precomputed importance vector.
pub fn vita_from_importance(importance: &ImportanceReport, alpha: f64) -> Result<VitaResult> {
    let null = mirrored_null(&importance.values)?;
    let pvalues = empirical_pvalues_sorted(&importance.values, &null);
    let adjusted = bh_adjust(&pvalues)?;
    Ok(VitaResult {
        importance: importance.values.clone(),
        selected: select_at(&adjusted, alpha),
        pvalues,
        adjusted,
        alpha,
        null_size: null.len(),
    })
}

/// Grows one forest and selects variables whose BH-adjusted empirical
/// p-value is at most `alpha`.
pub fn vita_select(data: &Dataset, hp: &HyperParams, alpha: f64) -> Result<VitaResult> {
    require_both_classes(data)?;
    let importance = forest_importance(data, hp)?;
    vita_from_importance(&importance, alpha)
}
