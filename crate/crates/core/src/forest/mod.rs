//! Randomized classification forests with corrected (signed) impurity
//! importance.

mod sampling;
mod split;
mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sampling::draw_training_rows;
pub use split::{best_split, gini_impurity, Split};
pub use tree::{grow_tree, shadow_permutation, Node, Tree};
use tree::{grow_tree_with, Presorted};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::rng::{self, Domain};

/// Trees per work unit. Contributions are summed within a chunk in tree
/// order and chunks are summed in chunk order, so the floating-point result
/// does not depend on the thread count.
const CHUNK: usize = 16;

/// Per-variable importance summed over all trees (not averaged).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub values: Vec<f64>,
    pub trees_used: usize,
}

#[derive(Clone, Debug)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub importance: ImportanceReport,
}

fn check_inputs(data: &Dataset, hp: &HyperParams) -> Result<()> {
    hp.validate()?;
    if data.n() < 2 || data.p() == 0 {
        return Err(Error::InvalidData("forest needs n >= 2 and p >= 1".into()));
    }
    Ok(())
}

fn grow_chunks<T, F>(data: &Dataset, hp: &HyperParams, keep: F) -> Result<(Vec<T>, Vec<f64>)>
where
    T: Send,
    F: Fn(Tree) -> Option<T> + Sync,
{
    check_inputs(data, hp)?;
    let perm = shadow_permutation(data.n(), &mut rng::stream(hp.seed, Domain::Forest, 0));
    let presorted = Presorted::build(data, &perm);
    let n_chunks = hp.num_trees.div_ceil(CHUNK);
    let chunks: Vec<(Vec<T>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut kept = Vec::new();
            let mut acc = vec![0.0; data.p()];
            for t in c * CHUNK..((c + 1) * CHUNK).min(hp.num_trees) {
                let mut stream = rng::stream(hp.seed, Domain::Tree, t as u64);
                let (tree, contrib) = grow_tree_with(data, hp, &perm, presorted.as_ref(), &mut stream)?;
                for (a, v) in acc.iter_mut().zip(&contrib) {
                    *a += v;
                }
                kept.extend(keep(tree));
            }
            Ok((kept, acc))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; data.p()];
    let mut trees = Vec::new();
    for (kept, acc) in chunks {
        for (v, a) in values.iter_mut().zip(&acc) {
            *v += a;
        }
        trees.extend(kept);
    }
    Ok((trees, values))
}

/// Grows `hp.num_trees` trees, each on its own stream derived from
/// `(hp.seed, tree index)`. All trees share one shadow permutation.
pub fn grow_forest(data: &Dataset, hp: &HyperParams) -> Result<Forest> {
    let (trees, values) = grow_chunks(data, hp, Some)?;
    Ok(Forest { trees, importance: ImportanceReport { values, trees_used: hp.num_trees } })
}

/// Same importance as [`grow_forest`] without keeping the trees.
pub fn forest_importance(data: &Dataset, hp: &HyperParams) -> Result<ImportanceReport> {
    let (_, values) = grow_chunks::<(), _>(data, hp, |_| None)?;
    Ok(ImportanceReport { values, trees_used: hp.num_trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noisy(n: usize, p: usize, seed: u64) -> Dataset {
        let mut s = rng::stream(seed, Domain::Replicate, 0);
        let cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| s.random::<f64>()).collect()).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(cols[0][i] > 0.5)).collect();
        Dataset::from_columns(cols, y).unwrap()
    }

    #[test]
    fn zero_trees_is_invalid() {
        let hp = HyperParams { num_trees: 0, ..Default::default() };
        assert!(matches!(grow_forest(&noisy(10, 2, 0), &hp), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn deterministic_and_thread_count_independent() {
        let d = noisy(60, 20, 4);
        let hp = HyperParams { num_trees: 50, mtry_prop: 0.2, seed: 9, ..Default::default() };
        let a = forest_importance(&d, &hp).unwrap();
        let b =
            rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| grow_forest(&d, &hp).unwrap());
        assert_eq!(a, b.importance);
        assert_eq!(b.trees.len(), 50);
        assert_eq!(a.values.len(), 20);
    }

    #[test]
    fn signal_variable_ranks_first() {
        let d = noisy(100, 30, 1);
        let hp = HyperParams { num_trees: 100, mtry_prop: 0.3, ..Default::default() };
        let imp = forest_importance(&d, &hp).unwrap().values;
        let best = (0..30).max_by(|&a, &b| imp[a].total_cmp(&imp[b])).unwrap();
        assert_eq!(best, 0);
        assert!(imp.iter().any(|&v| v < 0.0));
    }
}
