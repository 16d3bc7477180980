//! Brute-force reference implementations shared by the oracle and
//! acceptance suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfselect::forest::{best_split, Split};
use rfselect::selection::{bh_adjust, binomial_twosided};
use rfselect::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gini(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    1.0 - (c[0] as f64 / n).powi(2) - (c[1] as f64 / n).powi(2)
}

/// Tries every midpoint between consecutive distinct values and keeps the
/// largest decrease, smallest threshold on ties.
pub fn split_oracle(rows: &[usize], x: &[f64], y: &[u8], min_node_size: usize) -> Option<(f64, f64)> {
    let mut values: Vec<f64> = rows.iter().map(|&r| x[r]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut parent = [0; 2];
    for &r in rows {
        parent[y[r] as usize] += 1;
    }
    let n = rows.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let (mut l, mut r) = ([0; 2], [0; 2]);
        for &i in rows {
            if x[i] <= t {
                l[y[i] as usize] += 1;
            } else {
                r[y[i] as usize] += 1;
            }
        }
        let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
        if nl < min_node_size || nr < min_node_size {
            continue;
        }
        let d = gini(parent) - nl as f64 / n * gini(l) - nr as f64 / n * gini(r);
        if best.is_none_or(|(_, bd)| d > bd + 1e-12) {
            best = Some((t, d));
        }
    }
    best
}

/// Random micro dataset with heavy ties, and a row multiset drawn from it.
pub fn micro_case(seed: u64) -> (Dataset, Vec<usize>, usize) {
    let mut g = rng(seed);
    let n = g.random_range(2..=50);
    let p = g.random_range(1..=5);
    let levels = g.random_range(1..=8);
    let cols: Vec<Vec<f64>> =
        (0..p).map(|_| (0..n).map(|_| g.random_range(0..levels) as f64 * 0.5 - 1.0).collect()).collect();
    let y: Vec<u8> = (0..n).map(|_| g.random_range(0..2)).collect();
    let rows: Vec<usize> =
        if g.random_bool(0.5) { (0..n).collect() } else { (0..n).map(|_| g.random_range(0..n)).collect() };
    let mns = g.random_range(1..=4);
    (Dataset::from_columns(cols, y).unwrap(), rows, mns)
}

/// Checks `best_split` against the oracle on every variable of `cases`
/// micro datasets. Returns the number of (dataset, variable) pairs checked.
pub fn check_split_oracle(cases: u64) -> Result<usize, String> {
    let mut checked = 0;
    for seed in 0..cases {
        let (d, rows, mns) = micro_case(seed);
        for var in 0..d.p() {
            let got = best_split(&rows, var, &d, mns).map(|Split { threshold, decrease }| (threshold, decrease));
            let want = split_oracle(&rows, d.column(var), d.y(), mns);
            let ok = match (got, want) {
                (None, None) => true,
                (Some((t, dg)), Some((tw, dw))) => t == tw && (dg - dw).abs() <= 1e-12,
                _ => false,
            };
            if !ok {
                return Err(format!("case {seed} var {var}: got {got:?}, oracle {want:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Adjusted value of p_i: min over p_j >= p_i of m p_j / #{l : p_l <= p_j}, capped at 1.
pub fn bh_oracle(p: &[f64]) -> Vec<f64> {
    let m = p.len() as f64;
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj >= pi)
                .map(|&pj| m * pj / p.iter().filter(|&&pl| pl <= pj).count() as f64)
                .fold(1.0, f64::min)
        })
        .collect()
}

pub fn random_pvalues(seed: u64) -> Vec<f64> {
    let mut g = rng(seed);
    let m = g.random_range(1..=60);
    (0..m)
        .map(|_| match g.random_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            // Repeated values exercise ties.
            2 => 0.05,
            3 => g.random_range(0..20) as f64 / 20.0,
            _ => g.random::<f64>().powi(3),
        })
        .collect()
}

pub fn check_bh_oracle(lists: u64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for seed in 0..lists {
        let p = random_pvalues(seed);
        let got = bh_adjust(&p).map_err(|e| e.to_string())?;
        for (a, b) in got.iter().zip(bh_oracle(&p)) {
            worst = worst.max((a - b).abs());
        }
    }
    if worst <= 1e-12 {
        Ok(worst)
    } else {
        Err(format!("max deviation {worst:e}"))
    }
}

/// Enumerates all 2^trials outcomes; tails are exact dyadic rationals.
pub fn check_binomial_enumeration(max_trials: usize) -> Result<usize, String> {
    let mut checked = 0;
    for trials in 1..=max_trials {
        let mut count = vec![0u64; trials + 1];
        for outcome in 0u64..1 << trials {
            count[outcome.count_ones() as usize] += 1;
        }
        let total = (1u64 << trials) as f64;
        for hits in 0..=trials {
            let high = count[hits..].iter().sum::<u64>() as f64 / total;
            let low = count[..=hits].iter().sum::<u64>() as f64 / total;
            let got = binomial_twosided(hits, trials).map_err(|e| e.to_string())?;
            if got.p_high != high || got.p_low != low {
                return Err(format!("{hits}/{trials}: got {got:?}, enumeration ({high}, {low})"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
