//! Boruta: iterative hit counting against permuted shadow copies.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::require_both_classes;
use super::stats::binomial_twosided;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::forest_importance;
use crate::params::HyperParams;
use crate::rng::{self, Domain};

pub const DEFAULT_BORUTA_ALPHA: f64 = 0.01;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Rounds completed before the first test. Below five trials the
/// Bonferroni-corrected tail at 0.01 cannot be reached for any p >= 1.
pub const WARMUP_ROUNDS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Confirmed,
    Tentative,
    Rejected,
}

/// State of one round, kept for inspection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorutaRound {
    /// Original variables put into the extended frame this round.
    pub active: Vec<usize>,
    pub max_shadow: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorutaResult {
    pub decision: Vec<Decision>,
    pub hits: Vec<usize>,
    /// Mean importance over the rounds in which each variable was active.
    pub mean_importance: Vec<f64>,
    pub iterations_run: usize,
    pub trees_grown: usize,
    pub alpha: f64,
    pub rounds: Vec<BorutaRound>,
}

impl BorutaResult {
    pub fn confirmed(&self) -> Vec<usize> {
        self.with(Decision::Confirmed)
    }

    pub fn with(&self, d: Decision) -> Vec<usize> {
        self.decision.iter().enumerate().filter(|(_, &x)| x == d).map(|(j, _)| j).collect()
    }
}

/// Copies the `active` predictors and appends one independently permuted
/// copy of each. The response is unchanged.
pub fn shadow_extend<R: Rng + ?Sized>(data: &Dataset, active: &[usize], stream: &mut R) -> Result<Dataset> {
    if active.is_empty() {
        return Err(Error::Domain("shadow extension needs at least one active variable".into()));
    }
    let mut columns = Vec::with_capacity(2 * active.len());
    let mut names = Vec::with_capacity(2 * active.len());
    for &j in active {
        columns.push(data.column(j).to_vec());
        names.push(data.names()[j].clone());
    }
    for &j in active {
        let mut col = data.column(j).to_vec();
        col.shuffle(stream);
        columns.push(col);
        names.push(format!("shadow_{}", data.names()[j]));
    }
    Ok(Dataset::from_parts_unchecked(columns, data.y().to_vec(), names, None))
}

/// Runs Boruta with `hp.num_trees` trees per round.
///
/// Each round extends the non-rejected variables with shadows, grows a
/// forest on the extended frame and scores a hit for every active variable
/// whose importance beats the largest shadow importance. From round
/// [`WARMUP_ROUNDS`] on, tentative variables are tested with an exact
/// binomial test at level `alpha / p`.
pub fn boruta_select(data: &Dataset, hp: &HyperParams, alpha: f64, max_iter: usize) -> Result<BorutaResult> {
    require_both_classes(data)?;
    hp.validate()?;
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let p = data.p();
    let level = alpha / p as f64;
    let mut decision = vec![Decision::Tentative; p];
    let mut hits = vec![0usize; p];
    let mut imp_sum = vec![0.0f64; p];
    let mut imp_rounds = vec![0usize; p];
    let mut rounds = Vec::new();
    let mut trees_grown = 0;

    for round in 1..=max_iter {
        if !decision.contains(&Decision::Tentative) {
            break;
        }
        let active: Vec<usize> = (0..p).filter(|&j| decision[j] != Decision::Rejected).collect();
        let mut shadow_stream = rng::stream(hp.seed, Domain::Shadow, round as u64);
        let extended = shadow_extend(data, &active, &mut shadow_stream)?;
        let round_hp = hp.with_seed(rng::derive_seed(hp.seed, Domain::BorutaRound, round as u64));
        let importance = forest_importance(&extended, &round_hp)?.values;
        trees_grown += round_hp.num_trees;

        let (real, shadow) = importance.split_at(active.len());
        let max_shadow = shadow.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (&j, &v) in active.iter().zip(real) {
            imp_sum[j] += v;
            imp_rounds[j] += 1;
            if v > max_shadow {
                hits[j] += 1;
            }
        }
        rounds.push(BorutaRound { active, max_shadow });

        if round >= WARMUP_ROUNDS {
            for j in 0..p {
                if decision[j] != Decision::Tentative {
                    continue;
                }
                let tails = binomial_twosided(hits[j], round)?;
                if tails.p_high < level {
                    decision[j] = Decision::Confirmed;
                } else if tails.p_low < level {
                    decision[j] = Decision::Rejected;
                }
            }
        }
    }

    let mean_importance =
        imp_sum.iter().zip(&imp_rounds).map(|(&s, &r)| if r > 0 { s / r as f64 } else { 0.0 }).collect();
    Ok(BorutaResult { decision, hits, mean_importance, iterations_run: rounds.len(), trees_grown, alpha, rounds })
}
