use crate::error::{Error, Result};

/// Null sample for Vita: every non-positive importance plus the negation of
/// every strictly negative one. Zeros appear once. Returned sorted ascending.
pub fn mirrored_null(importance: &[f64]) -> Result<Vec<f64>> {
    let mut null: Vec<f64> = importance.iter().copied().filter(|&v| v <= 0.0).collect();
    if null.is_empty() {
        return Err(Error::DegenerateNull);
    }
    let mirrored: Vec<f64> = null.iter().filter(|&&v| v < 0.0).map(|&v| -v).collect();
    null.extend(mirrored);
    null.sort_by(f64::total_cmp);
    Ok(null)
}

/// `#{u in null : u >= v} / |null|`, without smoothing.
pub fn empirical_pvalue(v: f64, null: &[f64]) -> f64 {
    if null.is_empty() {
        return 1.0;
    }
    null.iter().filter(|&&u| u >= v).count() as f64 / null.len() as f64
}

/// Vectorised [`empirical_pvalue`] against a null sorted ascending.
pub(crate) fn empirical_pvalues_sorted(values: &[f64], sorted_null: &[f64]) -> Vec<f64> {
    let m = sorted_null.len() as f64;
    values
        .iter()
        .map(|&v| {
            let below = sorted_null.partition_point(|&u| u < v);
            (sorted_null.len() - below) as f64 / m
        })
        .collect()
}

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("p-value {bad} outside [0, 1]")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        // m p / rank >= p holds exactly; the floor undoes rounding below p.
        let candidate = (m as f64 * pvalues[i] / (rank + 1) as f64).max(pvalues[i]);
        running = running.min(candidate);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Upper and lower tail probabilities of `Binomial(trials, 1/2)` at `hits`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialTails {
    /// `P(X >= hits)`
    pub p_high: f64,
    /// `P(X <= hits)`
    pub p_low: f64,
}

pub fn binomial_twosided(hits: usize, trials: usize) -> Result<BinomialTails> {
    if trials == 0 {
        return Err(Error::Domain("binomial test needs at least one trial".into()));
    }
    if hits > trials {
        return Err(Error::Domain(format!("{hits} hits out of {trials} trials")));
    }
    if trials <= 120 {
        // Exact integer tail sums; the only rounding is the final division.
        let mut coef = 1u128;
        let (mut upper, mut lower) = (0u128, 0u128);
        for i in 0..=trials {
            if i >= hits {
                upper += coef;
            }
            if i <= hits {
                lower += coef;
            }
            coef = coef * (trials - i) as u128 / (i + 1) as u128;
        }
        let total = 2f64.powi(trials as i32);
        return Ok(BinomialTails { p_high: upper as f64 / total, p_low: lower as f64 / total });
    }
    let ln2 = std::f64::consts::LN_2;
    let mut ln_coef = 0.0f64;
    let (mut upper, mut lower) = (0.0f64, 0.0f64);
    for i in 0..=trials {
        let pmf = (ln_coef - trials as f64 * ln2).exp();
        if i >= hits {
            upper += pmf;
        }
        if i <= hits {
            lower += pmf;
        }
        if i < trials {
            ln_coef += ((trials - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    Ok(BinomialTails { p_high: upper.min(1.0), p_low: lower.min(1.0) })
}
