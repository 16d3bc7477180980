use crate::data::Dataset;
use crate::error::{Error, Result};

/// Winning threshold and weighted Gini decrease for one variable at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    /// Rows with `value <= threshold` go left.
    pub threshold: f64,
    pub decrease: f64,
}

/// Two-class Gini impurity `1 - sum_c (n_c / n)^2`.
pub fn gini_impurity(class_counts: [usize; 2]) -> Result<f64> {
    let [a, b] = class_counts;
    if a + b == 0 {
        return Err(Error::Domain("Gini impurity of an empty node".into()));
    }
    Ok(gini(a, b))
}

#[inline]
pub(crate) fn gini(a: usize, b: usize) -> f64 {
    let n = (a + b) as f64;
    let pa = a as f64 / n;
    let pb = b as f64 / n;
    1.0 - (pa * pa + pb * pb)
}

/// `G(parent) - (n_L/n) G(L) - (n_R/n) G(R)`.
#[inline]
pub(crate) fn gini_decrease(parent: [usize; 2], left: [usize; 2]) -> f64 {
    let right = [parent[0] - left[0], parent[1] - left[1]];
    let n = (parent[0] + parent[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    gini(parent[0], parent[1]) - (nl / n) * gini(left[0], left[1]) - (nr / n) * gini(right[0], right[1])
}

/// Exact rank of a split: the decrease is maximal where
/// `(l0^2 + l1^2) / n_L + (r0^2 + r1^2) / n_R` is, kept as a fraction
/// `num / den`. Small nodes use `u64`, larger ones `u128`.
#[inline]
fn score<T>(parent: [usize; 2], left: [usize; 2]) -> (T, T)
where
    T: Copy + From<u32> + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
{
    let c = |v: usize| T::from(v as u32);
    let (l0, l1, p0, p1) = (c(left[0]), c(left[1]), c(parent[0]), c(parent[1]));
    let (r0, r1) = (p0 - l0, p1 - l1);
    let (nl, nr) = (l0 + l1, r0 + r1);
    ((l0 * l0 + l1 * l1) * nr + (r0 * r0 + r1 * r1) * nl, nl * nr)
}

/// Largest node whose scores fit in `u64` products.
const SMALL_N: usize = 1 << 12;
/// Largest node whose scores fit in `u128` products.
const LARGE_N: usize = 1 << 20;

/// Running best boundary of one candidate variable.
pub(crate) enum Best {
    Small(Option<(f64, f64, [usize; 2], u64, u64)>),
    Large(Option<(f64, f64, [usize; 2], u128, u128)>),
    Float(Option<(f64, f64, [usize; 2], f64)>),
}

impl Best {
    pub(crate) fn new(n: usize) -> Best {
        if n <= SMALL_N {
            Best::Small(None)
        } else if n <= LARGE_N {
            Best::Large(None)
        } else {
            Best::Float(None)
        }
    }

    /// Offers the boundary between `lo` and `hi`; earlier offers win ties.
    #[inline]
    pub(crate) fn offer(&mut self, lo: f64, hi: f64, parent: [usize; 2], left: [usize; 2]) {
        match self {
            Best::Small(best) => {
                let (num, den) = score::<u64>(parent, left);
                if best.is_none_or(|b| num * b.4 > b.3 * den) {
                    *best = Some((lo, hi, left, num, den));
                }
            }
            Best::Large(best) => {
                let (num, den) = score::<u128>(parent, left);
                if best.is_none_or(|b| num * b.4 > b.3 * den) {
                    *best = Some((lo, hi, left, num, den));
                }
            }
            Best::Float(best) => {
                let d = gini_decrease(parent, left);
                if best.is_none_or(|b| d > b.3) {
                    *best = Some((lo, hi, left, d));
                }
            }
        }
    }

    pub(crate) fn finish(self, parent: [usize; 2]) -> Option<Split> {
        let (lo, hi, d) = match self {
            Best::Small(b) => b.map(|(lo, hi, left, _, _)| (lo, hi, gini_decrease(parent, left)))?,
            Best::Large(b) => b.map(|(lo, hi, left, _, _)| (lo, hi, gini_decrease(parent, left)))?,
            Best::Float(b) => b.map(|(lo, hi, _, d)| (lo, hi, d))?,
        };
        Some(Split { threshold: midpoint(lo, hi), decrease: d.max(0.0) })
    }
}

/// Midpoint of two consecutive distinct values that still separates them.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Best split over `(value, label)` pairs already sorted by value.
///
/// Candidates are midpoints between consecutive distinct values with at
/// least `min_node_size` rows on each side. Exact ties in decrease keep the
/// smallest threshold.
pub(crate) fn best_split_sorted(pairs: &[(f64, u8)], min_node_size: usize) -> Option<Split> {
    let n = pairs.len();
    if n < 2 || n < 2 * min_node_size {
        return None;
    }
    let ones = pairs.iter().filter(|(_, y)| *y == 1).count();
    let parent = [n - ones, ones];
    let mut left = [0usize; 2];
    let mut best = Best::new(n);
    for i in 0..n - 1 {
        left[pairs[i].1 as usize] += 1;
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let nl = i + 1;
        if nl < min_node_size {
            continue;
        }
        if n - nl < min_node_size {
            break;
        }
        best.offer(pairs[i].0, pairs[i + 1].0, parent, left);
    }
    best.finish(parent)
}

/// Best Gini split of `rows` on predictor `var`, or `None` when the variable
/// is constant on the rows or no threshold leaves `min_node_size` rows on
/// both sides.
pub fn best_split(rows: &[usize], var: usize, data: &Dataset, min_node_size: usize) -> Option<Split> {
    let col = data.column(var);
    let y = data.y();
    let mut pairs: Vec<(f64, u8)> = rows.iter().map(|&r| (col[r], y[r])).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    best_split_sorted(&pairs, min_node_size.max(1))
}
