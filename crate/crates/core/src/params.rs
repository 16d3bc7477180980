use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Forest tunables, with `mtry` and the minimal node size given as
/// proportions of `p` and `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub num_trees: usize,
    pub mtry_prop: f64,
    pub replace: bool,
    pub sample_fraction: f64,
    pub min_node_size_prop: f64,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            num_trees: 500,
            mtry_prop: 0.014,
            replace: true,
            sample_fraction: 0.632,
            min_node_size_prop: 0.01,
            seed: 0,
        }
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

fn in_unit_interval(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in (0, 1], got {v}")))
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::InvalidConfig("num_trees must be positive".into()));
        }
        in_unit_interval("mtry_prop", self.mtry_prop)?;
        in_unit_interval("sample_fraction", self.sample_fraction)?;
        in_unit_interval("min_node_size_prop", self.min_node_size_prop)?;
        if !self.replace && self.sample_fraction >= 1.0 {
            return Err(Error::InvalidConfig(
                "sampling without replacement with sample_fraction = 1 would train every tree on all rows".into(),
            ));
        }
        Ok(())
    }

    /// Split candidates per node for `p` predictors: `max(1, round(mtry_prop * p))`.
    pub fn mtry(&self, p: usize) -> usize {
        round_half_up(self.mtry_prop * p as f64).max(1)
    }

    /// Training rows per tree: `ceil(sample_fraction * n)`.
    pub fn sample_size(&self, n: usize) -> usize {
        // The small offset absorbs representation error such as 0.2 * 5.
        let s = (self.sample_fraction * n as f64 - 1e-9).ceil() as usize;
        s.clamp(1, if self.replace { usize::MAX } else { n })
    }

    pub fn min_node_size(&self, n: usize) -> usize {
        round_half_up(self.min_node_size_prop * n as f64).max(1)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
