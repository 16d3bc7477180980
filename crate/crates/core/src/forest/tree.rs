//! Single classification tree with signed impurity importance.
//!
//! The forest fixes one row permutation. Whenever predictor `j` is drawn as
//! a split candidate, its shadow (the column of `j` read through that
//! permutation) competes at the same node. A split on `j` credits
//! `+n_node * decrease` to `j`; a split on the shadow of `j` debits the same
//! amount. For a predictor unrelated to the response the real and shadow
//! columns are exchangeable, so its importance is centred on zero.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::sampling::draw_training_rows;
use super::split::{best_split_sorted, Best, Split};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::HyperParams;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        /// Index into the candidate pool: `< p` real, `>= p` shadow of `var - p`.
        var: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: [usize; 2],
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    training_rows: Vec<usize>,
    n_predictors: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn training_rows(&self) -> &[usize] {
        &self.training_rows
    }

    /// Real predictor behind a pool index, and whether it was the shadow copy.
    pub fn resolve_var(&self, var: usize) -> (usize, bool) {
        if var >= self.n_predictors {
            (var - self.n_predictors, true)
        } else {
            (var, false)
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { class_counts } => Some(*class_counts),
            Node::Split { .. } => None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }
}

/// Row order of every pool column (reals, then shadows), shared by all
/// trees of a forest. Large nodes scan these orders instead of sorting.
pub(crate) struct Presorted {
    n: usize,
    order: Vec<u32>,
    values: Vec<f64>,
}

/// Beyond this many stored entries the forest sorts at every node instead.
const PRESORT_LIMIT: usize = 1 << 26;

impl Presorted {
    pub(crate) fn build(data: &Dataset, perm: &[usize]) -> Option<Presorted> {
        let (n, p) = (data.n(), data.p());
        if 2 * p * n > PRESORT_LIMIT || n > u32::MAX as usize {
            return None;
        }
        let mut inverse = vec![0u32; n];
        for (i, &r) in perm.iter().enumerate() {
            inverse[r] = i as u32;
        }
        let mut order = vec![0u32; 2 * p * n];
        let mut values = vec![0.0; 2 * p * n];
        let (real, shadow) = order.split_at_mut(p * n);
        let (real_v, shadow_v) = values.split_at_mut(p * n);
        for j in 0..p {
            let col = data.column(j);
            let o = &mut real[j * n..(j + 1) * n];
            o.iter_mut().enumerate().for_each(|(i, v)| *v = i as u32);
            o.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            for (k, &r) in o.iter().enumerate() {
                shadow[j * n + k] = inverse[r as usize];
                real_v[j * n + k] = col[r as usize];
                shadow_v[j * n + k] = col[r as usize];
            }
        }
        Some(Presorted { n, order, values })
    }

    fn of(&self, var: usize) -> (&[u32], &[f64]) {
        let range = var * self.n..(var + 1) * self.n;
        (&self.order[range.clone()], &self.values[range])
    }
}

/// Reusable per-tree working memory.
struct Grower<'a> {
    data: &'a Dataset,
    perm: &'a [usize],
    presorted: Option<&'a Presorted>,
    mtry: usize,
    min_node_size: usize,
    pairs: Vec<(f64, u8)>,
    /// Multiplicity of each row in the current node (scan path only).
    mult: Vec<u32>,
}

impl Grower<'_> {
    #[inline]
    fn value(&self, var: usize, row: usize) -> f64 {
        let p = self.data.p();
        if var < p {
            self.data.column(var)[row]
        } else {
            self.data.column(var - p)[self.perm[row]]
        }
    }

    fn split_candidate(&mut self, rows: &[usize], var: usize) -> Option<Split> {
        let y = self.data.y();
        self.pairs.clear();
        for &r in rows {
            let v = self.value(var, r);
            self.pairs.push((v, y[r]));
        }
        self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        best_split_sorted(&self.pairs, self.min_node_size)
    }

    /// Same result as [`Self::split_candidate`], walking the presorted
    /// order of `var` and skipping rows outside the node (`mult == 0`).
    fn split_scan(&self, (order, values): (&[u32], &[f64]), parent: [usize; 2]) -> Option<Split> {
        let y = self.data.y();
        let n = parent[0] + parent[1];
        let mns = self.min_node_size;
        let mut left = [0usize; 2];
        let mut prev = f64::NAN;
        let mut best = Best::new(n);
        for (&r, &v) in order.iter().zip(values) {
            let r = r as usize;
            let m = self.mult[r] as usize;
            if m == 0 {
                continue;
            }
            let nl = left[0] + left[1];
            if nl > 0 && v != prev && nl >= mns {
                if n - nl < mns {
                    break;
                }
                best.offer(prev, v, parent, left);
            }
            left[y[r] as usize] += m;
            prev = v;
        }
        best.finish(parent)
    }
}

/// Node size from which scanning the full presorted order beats sorting.
fn use_scan(size: usize, n: usize) -> bool {
    4 * size >= n
}

fn counts(y: &[u8], rows: &[usize]) -> [usize; 2] {
    let ones = rows.iter().filter(|&&r| y[r] == 1).count();
    [rows.len() - ones, ones]
}

/// Row permutation that defines the shadow columns of a forest.
pub fn shadow_permutation<R: Rng + ?Sized>(n: usize, stream: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(stream);
    perm
}

/// Grows one tree and returns it with its signed importance contributions
/// (length `p`). `shadow_perm` must be a permutation of `0..n`.
pub fn grow_tree<R: Rng + ?Sized>(
    data: &Dataset,
    hp: &HyperParams,
    shadow_perm: &[usize],
    stream: &mut R,
) -> Result<(Tree, Vec<f64>)> {
    if shadow_perm.len() != data.n() {
        return Err(Error::Domain(format!(
            "shadow permutation has {} entries for {} rows",
            shadow_perm.len(),
            data.n()
        )));
    }
    let presorted = Presorted::build(data, shadow_perm);
    grow_tree_with(data, hp, shadow_perm, presorted.as_ref(), stream)
}

pub(crate) fn grow_tree_with<R: Rng + ?Sized>(
    data: &Dataset,
    hp: &HyperParams,
    shadow_perm: &[usize],
    presorted: Option<&Presorted>,
    stream: &mut R,
) -> Result<(Tree, Vec<f64>)> {
    hp.validate()?;
    let n = data.n();
    let p = data.p();
    let training_rows = draw_training_rows(n, hp, stream)?;

    let mut g = Grower {
        data,
        perm: shadow_perm,
        presorted,
        mtry: hp.mtry(p).min(p),
        min_node_size: hp.min_node_size(n),
        pairs: Vec::with_capacity(training_rows.len()),
        mult: if presorted.is_some() { vec![0; n] } else { Vec::new() },
    };
    let mut importance = vec![0.0; p];
    let mut rows = training_rows.clone();
    let mut nodes = vec![Node::Leaf { class_counts: [0, 0] }];
    // (node id, start, end) into `rows`
    let mut stack = vec![(0usize, 0usize, rows.len())];

    while let Some((id, start, end)) = stack.pop() {
        let node_rows = &rows[start..end];
        let class_counts = counts(data.y(), node_rows);
        let size = end - start;
        if class_counts[0] == 0 || class_counts[1] == 0 || size < 2 * g.min_node_size {
            nodes[id] = Node::Leaf { class_counts };
            continue;
        }

        let candidates = index::sample(stream, p, g.mtry);
        let scan = g.presorted.filter(|_| use_scan(size, n));
        if scan.is_some() {
            node_rows.iter().for_each(|&r| g.mult[r] += 1);
        }
        let mut best: Option<(usize, Split)> = None;
        for var in candidates.iter().flat_map(|j| [j, j + p]) {
            let found = match scan {
                Some(ps) => g.split_scan(ps.of(var), class_counts),
                None => g.split_candidate(node_rows, var),
            };
            let Some(s) = found else { continue };
            let better = match &best {
                None => true,
                Some((bv, b)) => {
                    s.decrease > b.decrease
                        || (s.decrease == b.decrease
                            && (s.threshold < b.threshold || (s.threshold == b.threshold && var < *bv)))
                }
            };
            if better {
                best = Some((var, s));
            }
        }
        if scan.is_some() {
            node_rows.iter().for_each(|&r| g.mult[r] = 0);
        }
        let Some((var, split)) = best else {
            nodes[id] = Node::Leaf { class_counts };
            continue;
        };

        let weighted = size as f64 * split.decrease;
        if var < p {
            importance[var] += weighted;
        } else {
            importance[var - p] -= weighted;
        }

        // Stable partition: rows with value <= threshold first.
        let node_rows = &mut rows[start..end];
        let mut left: Vec<usize> = Vec::with_capacity(size);
        let mut right: Vec<usize> = Vec::with_capacity(size);
        for &r in node_rows.iter() {
            if g.value(var, r) <= split.threshold {
                left.push(r);
            } else {
                right.push(r);
            }
        }
        let mid = start + left.len();
        node_rows[..left.len()].copy_from_slice(&left);
        node_rows[left.len()..].copy_from_slice(&right);

        let left_id = nodes.len();
        let right_id = left_id + 1;
        nodes.push(Node::Leaf { class_counts: [0, 0] });
        nodes.push(Node::Leaf { class_counts: [0, 0] });
        nodes[id] = Node::Split { var, threshold: split.threshold, left: left_id, right: right_id };
        stack.push((right_id, mid, end));
        stack.push((left_id, start, mid));
    }

    Ok((Tree { nodes, training_rows, n_predictors: p }, importance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn perm(d: &Dataset) -> Vec<usize> {
        shadow_permutation(d.n(), &mut stream(99, Domain::Forest, 0))
    }

    fn hp_all_candidates(p: usize) -> HyperParams {
        HyperParams {
            mtry_prop: 1.0,
            sample_fraction: 0.99,
            replace: false,
            min_node_size_prop: 0.01,
            ..Default::default()
        }
        .with_seed(p as u64)
    }

    #[test]
    fn pure_response_gives_single_leaf() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0]], vec![0, 0, 0, 0]).unwrap();
        let hp = HyperParams { sample_fraction: 1.0, ..Default::default() };
        let (tree, imp) = grow_tree(&d, &hp, &perm(&d), &mut stream(0, Domain::Tree, 0)).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(imp, vec![0.0]);
    }

    #[test]
    fn separable_toy_splits_at_midpoint() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0]], vec![0, 0, 1, 1]).unwrap();
        // Draw all four rows once: without replacement at 0.99 -> ceil(3.96) = 4.
        let hp = hp_all_candidates(1);
        for t in 0..20 {
            let (tree, imp) = grow_tree(&d, &hp, &perm(&d), &mut stream(5, Domain::Tree, t)).unwrap();
            let mut rows = tree.training_rows().to_vec();
            rows.sort();
            assert_eq!(rows, vec![0, 1, 2, 3]);
            match tree.root() {
                Node::Split { var, threshold, left, right } => {
                    // A shadow can at best tie at 2.5, and ties go to the real variable.
                    assert_eq!(tree.resolve_var(*var), (0, false));
                    assert_eq!(*threshold, 2.5);
                    assert_eq!(imp, vec![2.0]);
                    assert!(matches!(tree.nodes()[*left], Node::Leaf { .. }));
                    assert!(matches!(tree.nodes()[*right], Node::Leaf { .. }));
                }
                Node::Leaf { .. } => panic!("expected a split"),
            }
        }
    }

    #[test]
    fn leaves_respect_min_node_size() {
        let n = 100;
        let mut s = stream(11, Domain::Replicate, 0);
        let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| s.random::<f64>()).collect()).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(cols[0][i] + 0.3 * s.random::<f64>() > 0.6)).collect();
        let d = Dataset::from_columns(cols, y).unwrap();
        let hp = HyperParams { min_node_size_prop: 0.2, mtry_prop: 0.4, ..Default::default() };
        for t in 0..30 {
            let (tree, _) = grow_tree(&d, &hp, &perm(&d), &mut stream(1, Domain::Tree, t)).unwrap();
            assert!(tree.leaves().all(|c| c[0] + c[1] >= 20));
            let total: usize = tree.leaves().map(|c| c[0] + c[1]).sum();
            assert_eq!(total, tree.training_rows().len());
        }
    }

    #[test]
    fn presorted_scan_matches_sorting() {
        let n = 80;
        let mut s = stream(3, Domain::Replicate, 0);
        // Rounded values force ties.
        let cols: Vec<Vec<f64>> =
            (0..12).map(|_| (0..n).map(|_| (s.random::<f64>() * 8.0).round()).collect()).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(cols[0][i] + 4.0 * s.random::<f64>() > 6.0)).collect();
        let d = Dataset::from_columns(cols, y).unwrap();
        let perm = perm(&d);
        let ps = Presorted::build(&d, &perm).unwrap();
        for (t, replace) in [(0, true), (1, false), (2, true), (3, false)] {
            let hp = HyperParams { mtry_prop: 0.5, replace, sample_fraction: 0.7, ..Default::default() };
            let a = grow_tree_with(&d, &hp, &perm, Some(&ps), &mut stream(8, Domain::Tree, t)).unwrap();
            let b = grow_tree_with(&d, &hp, &perm, None, &mut stream(8, Domain::Tree, t)).unwrap();
            assert_eq!(a, b);
        }
    }
}
