//! Simulation designs for benchmarking variable selection.

mod study1;
mod study2;

pub use study1::{block_name, expected_block_correlation, gen_study1, noise_coefficient, Study1Config};
pub use study2::{default_effects, gen_study2, gen_surrogate_expression, standardize, ExpressionMatrix, Study2Config};

use crate::data::Dataset;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedReplicate {
    /// Predictors, response and truth mask.
    pub data: Dataset,
    /// Effect size behind each predictor (0 for noise).
    pub betas: Vec<f64>,
    pub replicate_id: u64,
    /// No predictor carries an effect, so sensitivity is undefined.
    pub null_replicate: bool,
}
