use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimulatedReplicate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Samples-by-genes expression matrix, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpressionMatrix {
    pub columns: Vec<Vec<f64>>,
    pub names: Vec<String>,
}

impl ExpressionMatrix {
    pub fn samples(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn genes(&self) -> usize {
        self.columns.len()
    }

    /// Reads a CSV with a header of gene names and one row per sample.
    /// A column named `y` is ignored.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<ExpressionMatrix> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
        let keep: Vec<usize> = (0..header.len()).filter(|&i| &header[i] != "y").collect();
        let names: Vec<String> = keep.iter().map(|&i| header[i].to_string()).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            for (c, &i) in keep.iter().enumerate() {
                let field = rec[i].trim();
                let v: f64 =
                    field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                        Error::parse(path, format!("line {}: `{field}` is not a finite number", row + 2))
                    })?;
                columns[c].push(v);
            }
        }
        if columns.is_empty() || columns[0].len() < 2 {
            return Err(Error::parse(path, "expression matrix needs at least 2 samples and 1 gene"));
        }
        Ok(ExpressionMatrix { columns, names })
    }
}

/// Expression-based design: standardized genes, random case/control split,
/// mean-shift effects on a random subset, independently permuted noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study2Config {
    pub n_effect: usize,
    /// Signed effect sizes, assigned round-robin over the effect variables.
    pub effects: Vec<f64>,
    pub seed: u64,
}

impl Default for Study2Config {
    fn default() -> Self {
        Study2Config { n_effect: 200, effects: default_effects(), seed: 1 }
    }
}

/// `{-0.1, 0.1, -0.2, 0.2, ..., -0.8, 0.8}`
pub fn default_effects() -> Vec<f64> {
    (1..=8).flat_map(|i| [-(i as f64) / 10.0, i as f64 / 10.0]).collect()
}

/// Scales every column to unit sample standard deviation (denominator `m - 1`).
pub fn standardize(columns: &mut [Vec<f64>], names: &[String]) -> Result<()> {
    for (col, name) in columns.iter_mut().zip(names) {
        let m = col.len() as f64;
        let mean = col.iter().sum::<f64>() / m;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let sd = var.sqrt();
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::ConstantColumn { column: name.clone() });
        }
        col.iter_mut().for_each(|v| *v /= sd);
    }
    Ok(())
}

pub fn gen_study2(cfg: &Study2Config, base: &ExpressionMatrix, replicate_id: u64) -> Result<SimulatedReplicate> {
    let m = base.samples();
    let p = base.genes();
    if m < 2 {
        return Err(Error::InvalidConfig(format!("expression matrix needs at least 2 samples, got {m}")));
    }
    if cfg.n_effect > p {
        return Err(Error::InvalidConfig(format!("{} effect variables but only {p} genes", cfg.n_effect)));
    }
    if cfg.n_effect > 0 && cfg.effects.is_empty() {
        return Err(Error::InvalidConfig("effect list is empty".into()));
    }
    let mut columns = base.columns.clone();
    standardize(&mut columns, &base.names)?;

    let mut s = rng::stream(cfg.seed, Domain::Replicate, replicate_id);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut s);
    let mut y = vec![0u8; m];
    for &i in &order[..m / 2] {
        y[i] = 1;
    }

    let chosen = index::sample(&mut s, p, cfg.n_effect).into_vec();
    let mut betas = vec![0.0; p];
    for (slot, &j) in chosen.iter().enumerate() {
        let beta = cfg.effects[slot % cfg.effects.len()];
        betas[j] = beta;
        for (v, &yi) in columns[j].iter_mut().zip(&y) {
            *v += if yi == 1 { beta } else { -beta };
        }
    }
    let mut truth = vec![false; p];
    for &j in &chosen {
        truth[j] = true;
    }
    for (j, col) in columns.iter_mut().enumerate() {
        if !truth[j] {
            col.shuffle(&mut s);
        }
    }
    let null_replicate = cfg.n_effect == 0;
    let data = Dataset::new(columns, y, base.names.clone())?.with_truth(truth)?;
    Ok(SimulatedReplicate { data, betas, replicate_id, null_replicate })
}

/// Latent-factor stand-in for a real expression matrix: 20 factors, each
/// gene loading on zero to three of them, plus gene-level noise, location
/// and scale.
pub fn gen_surrogate_expression(m: usize, p: usize, seed: u64) -> Result<ExpressionMatrix> {
    if m < 10 || p < 10 {
        return Err(Error::InvalidConfig(format!("surrogate needs m >= 10 and p >= 10, got {m} x {p}")));
    }
    const FACTORS: usize = 20;
    let mut s = rng::stream(seed, Domain::Surrogate, 0);
    let factors: Vec<Vec<f64>> =
        (0..FACTORS).map(|_| (0..m).map(|_| StandardNormal.sample(&mut s)).collect()).collect();
    let loading = Normal::new(0.0, 1.2).expect("valid normal");
    let mut columns = Vec::with_capacity(p);
    for _ in 0..p {
        let n_loads = s.random_range(0..=3usize);
        let loads: Vec<(usize, f64)> =
            index::sample(&mut s, FACTORS, n_loads).iter().map(|f| (f, loading.sample(&mut s))).collect();
        let location = 6.0 + 2.0 * s.random::<f64>();
        let scale = 0.3 + s.random::<f64>();
        let col = (0..m)
            .map(|i| {
                let signal: f64 = loads.iter().map(|&(f, l)| l * factors[f][i]).sum();
                let eps: f64 = StandardNormal.sample(&mut s);
                location + scale * (signal + eps)
            })
            .collect();
        columns.push(col);
    }
    let names = (1..=p).map(|j| format!("g{j}")).collect();
    Ok(ExpressionMatrix { columns, names })
}
