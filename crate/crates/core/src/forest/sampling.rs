use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::HyperParams;

/// Draws the training rows of one tree: `ceil(sample_fraction * n)` indices
/// in `0..n`, with or without replacement.
pub fn draw_training_rows<R: Rng + ?Sized>(n: usize, hp: &HyperParams, stream: &mut R) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Domain("cannot sample from zero rows".into()));
    }
    if !hp.replace && hp.sample_fraction >= 1.0 {
        return Err(Error::InvalidConfig("sampling without replacement with sample_fraction = 1".into()));
    }
    if !(hp.sample_fraction > 0.0 && hp.sample_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("sample_fraction must lie in (0, 1], got {}", hp.sample_fraction)));
    }
    let size = hp.sample_size(n);
    Ok(if hp.replace {
        (0..size).map(|_| stream.random_range(0..n)).collect()
    } else {
        index::sample(stream, n, size).into_vec()
    })
}
