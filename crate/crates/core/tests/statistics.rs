use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rfselect::selection::{boruta_select, shadow_extend, vita_select, Decision};
use rfselect::simgen::*;
use rfselect::{Dataset, HyperParams};

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

fn ycol(d: &Dataset) -> Vec<f64> {
    d.y().iter().map(|&v| v as f64).collect()
}

#[test]
fn block_correlations_follow_the_formula() {
    let k = 10;
    let cfg = Study1Config { k, p: 6 * k, ..Default::default() };
    let reps = 50;
    let mut sums = vec![0.0; k + 1];
    for r in 0..reps {
        let d = gen_study1(&cfg, r).unwrap().data;
        for j in 2..=k {
            for q in 0..6 {
                sums[j] += corr(d.column(q), d.column((j - 1) * 6 + q)) / (6 * reps) as f64;
            }
        }
    }
    let tol = 4.0 / (cfg.n as f64).sqrt();
    for j in 2..=k {
        // Independent noise on both members: the correlation factorizes.
        let want = expected_block_correlation(1, k).unwrap() * expected_block_correlation(j, k).unwrap();
        assert!((sums[j] - want).abs() < tol, "j={j}: {} vs {want}", sums[j]);
    }
    assert!(sums[k] < sums[2]);
}

#[test]
fn study1_truth_counts() {
    for k in [10, 50] {
        let cfg = Study1Config { k, p: 500, ..Default::default() };
        let full = (0..40)
            .map(|r| gen_study1(&cfg, r).unwrap())
            .find(|rep| rep.betas.iter().take(3).all(|&b| b != 0.0))
            .expect("some replicate has three nonzero effects");
        assert_eq!(full.data.truth_indices().unwrap().len(), 3 * k);
    }
}

#[test]
fn study2_effect_balance_and_shift() {
    let base = gen_surrogate_expression(78, 400, 2).unwrap();
    let cfg = Study2Config { n_effect: 320, ..Default::default() };
    let mut diffs = Vec::new();
    for r in 0..20 {
        let rep = gen_study2(&cfg, &base, r).unwrap();
        let mut per_value: BTreeMap<i64, usize> = BTreeMap::new();
        for &b in rep.betas.iter().filter(|b| **b != 0.0) {
            *per_value.entry((b * 10.0).round() as i64).or_default() += 1;
        }
        assert_eq!(per_value.len(), 16);
        assert!(per_value.values().all(|&c| c == 20));
        assert_eq!(rep.data.truth_indices().unwrap().len(), 320);

        let y = rep.data.y();
        for (j, _) in rep.betas.iter().enumerate().filter(|(_, b)| **b == 0.8) {
            let col = rep.data.column(j);
            let mean = |c: u8| {
                let v: Vec<f64> = col.iter().zip(y).filter(|(_, &yy)| yy == c).map(|(x, _)| *x).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            diffs.push(mean(1) - mean(0));
        }
    }
    let n = diffs.len() as f64;
    let m = diffs.iter().sum::<f64>() / n;
    let se = (diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt();
    assert!((m - 1.6).abs() < 3.0 * se.max(1e-3), "mean shift {m}, se {se}");
}

#[test]
fn study2_noise_columns_are_independent_of_y() {
    let base = gen_surrogate_expression(78, 300, 4).unwrap();
    let cfg = Study2Config { n_effect: 20, ..Default::default() };
    let rep = gen_study2(&cfg, &base, 0).unwrap();
    let y = ycol(&rep.data);
    let truth = rep.data.truth().unwrap();
    let c: Vec<f64> = (0..300).filter(|&j| !truth[j]).map(|j| corr(rep.data.column(j), &y).abs()).collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    assert!(mean < 2.0 / 78f64.sqrt(), "{mean}");
}

fn p95_abs_corr(cols: &[Vec<f64>]) -> f64 {
    let mut v = Vec::new();
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            v.push(corr(&cols[a], &cols[b]).abs());
        }
    }
    v.sort_by(f64::total_cmp);
    v[v.len() * 95 / 100]
}

#[test]
fn surrogate_has_heavier_correlation_tail_than_iid() {
    let s = gen_surrogate_expression(78, 150, 7).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(7);
    let iid: Vec<Vec<f64>> = (0..150).map(|_| (0..78).map(|_| g.sample(StandardNormal)).collect()).collect();
    let (a, b) = (p95_abs_corr(&s.columns), p95_abs_corr(&iid));
    assert!(a > b + 0.02, "surrogate {a}, iid {b}");
}

fn noise_data(n: usize, p: usize, seed: u64) -> Dataset {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..p).map(|_| (0..n).map(|_| g.random::<f64>()).collect()).collect();
    let mut y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    rand::seq::SliceRandom::shuffle(&mut y[..], &mut g);
    Dataset::from_columns(cols, y).unwrap()
}

#[test]
fn shadows_are_decorrelated_from_y() {
    let mut total = 0.0;
    let reps = 20;
    for r in 0..reps {
        let mut d = noise_data(100, 5, r);
        // Make the originals informative so the check is not vacuous.
        let y = ycol(&d);
        let cols: Vec<Vec<f64>> = (0..5).map(|j| d.column(j).iter().zip(&y).map(|(x, t)| x + t).collect()).collect();
        d = Dataset::from_columns(cols, d.y().to_vec()).unwrap();
        let ext = shadow_extend(&d, &[0, 1, 2, 3, 4], &mut ChaCha8Rng::seed_from_u64(r)).unwrap();
        assert_eq!(ext.p(), 10);
        for j in 5..10 {
            total += corr(ext.column(j), &y).abs() / (5 * reps) as f64;
        }
    }
    assert!(total < 4.0 / 10.0, "{total}");
}

#[test]
fn vita_on_noise_selects_little() {
    // Unsmoothed p-values give p = 0 to positive values beyond the whole
    // mirrored null, about one variable per noise dataset.
    let (reps, p) = (30, 100);
    let mut false_positives = 0;
    for r in 0..reps {
        let d = noise_data(100, p, 100 + r);
        let hp = HyperParams { num_trees: 300, mtry_prop: 0.1, seed: r, ..Default::default() };
        false_positives += vita_select(&d, &hp, 0.05).unwrap().selected.len();
    }
    let per_dataset = false_positives as f64 / reps as f64;
    assert!(per_dataset <= 2.0, "{per_dataset} false positives per dataset");
    assert!(per_dataset / (p as f64) <= 0.02);
}

#[test]
fn boruta_confirms_a_strong_effect() {
    let mut d = noise_data(100, 20, 9);
    let y: Vec<u8> = d.column(0).iter().map(|&x| u8::from(x > 0.5)).collect();
    d = Dataset::from_columns(d.columns().to_vec(), y).unwrap();
    let hp = HyperParams { num_trees: 100, mtry_prop: 0.3, seed: 2, ..Default::default() };
    let r = boruta_select(&d, &hp, 0.01, 40).unwrap();
    assert_eq!(r.decision[0], Decision::Confirmed);
    assert!(r.iterations_run <= 40);
}

#[test]
fn boruta_rarely_confirms_noise() {
    let reps = 40;
    let mut with_confirmed = 0;
    for rep in 0..reps {
        let d = noise_data(100, 200, 500 + rep);
        let hp = HyperParams { num_trees: 100, mtry_prop: 0.1, seed: rep, ..Default::default() };
        let r = boruta_select(&d, &hp, 0.01, 30).unwrap();
        with_confirmed += usize::from(!r.confirmed().is_empty());
    }
    assert!(with_confirmed * 20 <= reps as usize, "{with_confirmed} of {reps}");
}

#[test]
fn boruta_bookkeeping() {
    let mut d = noise_data(80, 12, 3);
    let y: Vec<u8> = d.column(0).iter().zip(d.column(1)).map(|(a, b)| u8::from(a + b > 1.0)).collect();
    d = Dataset::from_columns(d.columns().to_vec(), y).unwrap();
    let hp = HyperParams { num_trees: 40, mtry_prop: 0.3, seed: 5, ..Default::default() };
    let r = boruta_select(&d, &hp, 0.01, 30).unwrap();
    assert_eq!(r.decision.len(), 12);
    assert_eq!(r.rounds.len(), r.iterations_run);
    for j in 0..12 {
        let active = r.rounds.iter().filter(|round| round.active.contains(&j)).count();
        assert!(r.hits[j] <= active);
        if r.decision[j] == Decision::Rejected {
            let first_out = r.rounds.iter().position(|round| !round.active.contains(&j)).unwrap();
            assert!(r.rounds[first_out..].iter().all(|round| !round.active.contains(&j)));
        }
    }

    let short = boruta_select(&d, &hp, 0.01, 3).unwrap();
    assert_eq!(short.iterations_run, 3);
    assert!(short.decision.iter().all(|&x| x == Decision::Tentative));
}
