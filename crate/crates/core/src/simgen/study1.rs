use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimulatedReplicate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Block-correlated uniform predictors with a logistic response driven by
/// the first three base variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study1Config {
    /// Correlated variables per base variable.
    pub k: usize,
    pub n: usize,
    /// Total predictors; the remainder after `n_base * k` is independent padding.
    pub p: usize,
    pub n_base: usize,
    /// Base variables that may carry an effect (the first ones).
    pub n_effect_base: usize,
    pub effect_set: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for Study1Config {
    fn default() -> Self {
        Study1Config {
            k: 10,
            n: 100,
            p: 5000,
            n_base: 6,
            n_effect_base: 3,
            effect_set: vec![-3.0, 3.0, -2.0, 2.0, -1.0, 1.0, 0.0],
            noise_sd: 0.3,
            seed: 1,
        }
    }
}

impl Study1Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k < 2 {
            return bad(format!("block size k must be at least 2, got {}", self.k));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.n_effect_base > self.n_base {
            return bad("more effect bases than bases".into());
        }
        if self.p < self.n_base * self.k {
            return bad(format!("p = {} is smaller than {} block variables", self.p, self.n_base * self.k));
        }
        if self.effect_set.len() < self.n_effect_base {
            return bad("effect set smaller than the number of effect bases".into());
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(format!("noise_sd must be non-negative, got {}", self.noise_sd));
        }
        Ok(())
    }

    /// Number of variables that carry signal when every effect base has `beta != 0`.
    pub fn max_true(&self) -> usize {
        self.n_effect_base * self.k
    }
}

/// Noise multiplier `0.01 + 0.5 (j - 1) / (k - 1)` of the `j`-th block member.
pub fn noise_coefficient(j: usize, k: usize) -> f64 {
    0.01 + 0.5 * (j as f64 - 1.0) / (k as f64 - 1.0)
}

/// Population correlation between a U(0,1) base variable and its `j`-th
/// block member under noise standard deviation 0.3.
pub fn expected_block_correlation(j: usize, k: usize) -> Result<f64> {
    if k < 2 || j == 0 || j > k {
        return Err(Error::Domain(format!("need 1 <= j <= k and k >= 2, got j = {j}, k = {k}")));
    }
    let var_base = 1.0 / 12.0;
    let c = noise_coefficient(j, k) * 0.3;
    Ok((var_base / (var_base + c * c)).sqrt())
}

/// Column name of block member `j` of base `q` (both 1-based).
pub fn block_name(j: usize, q: usize) -> String {
    format!("v{j}_{q}")
}

pub fn gen_study1(cfg: &Study1Config, replicate_id: u64) -> Result<SimulatedReplicate> {
    cfg.validate()?;
    let mut s = rng::stream(cfg.seed, Domain::Replicate, replicate_id);
    let n = cfg.n;
    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let bases: Vec<Vec<f64>> = (0..cfg.n_base).map(|_| (0..n).map(|_| s.random::<f64>()).collect()).collect();

    let mut columns = Vec::with_capacity(cfg.p);
    let mut names = Vec::with_capacity(cfg.p);
    let mut base_of = Vec::with_capacity(cfg.p);
    for j in 1..=cfg.k {
        let c = noise_coefficient(j, cfg.k);
        for (q, base) in bases.iter().enumerate() {
            columns.push(base.iter().map(|&x| x + c * noise.sample(&mut s)).collect::<Vec<f64>>());
            names.push(block_name(j, q + 1));
            base_of.push(Some(q));
        }
    }
    for i in columns.len() + 1..=cfg.p {
        columns.push((0..n).map(|_| s.random::<f64>()).collect());
        names.push(format!("x{i}"));
        base_of.push(None);
    }

    // Effects drawn without replacement from the effect set.
    let picks = index::sample(&mut s, cfg.effect_set.len(), cfg.n_effect_base);
    let beta: Vec<f64> = picks.iter().map(|i| cfg.effect_set[i]).collect();
    let y: Vec<u8> = (0..n)
        .map(|i| {
            let eta: f64 = beta.iter().zip(&bases).map(|(b, x)| b * x[i]).sum();
            let prob = 1.0 / (1.0 + (-eta).exp());
            u8::from(s.random::<f64>() < prob)
        })
        .collect();

    let betas: Vec<f64> = base_of
        .iter()
        .map(|q| match q {
            Some(q) if *q < cfg.n_effect_base => beta[*q],
            _ => 0.0,
        })
        .collect();
    let truth: Vec<bool> = betas.iter().map(|&b| b != 0.0).collect();
    let null_replicate = !truth.contains(&true);
    let data = Dataset::new(columns, y, names)?.with_truth(truth)?;
    Ok(SimulatedReplicate { data, betas, replicate_id, null_replicate })
}
