//! Random-forest variable selection.
//!
//! Forests report a signed impurity importance whose null distribution is
//! centred on zero. On top of it sit two selection procedures: Vita
//! (mirrored-null empirical p-values with Benjamini-Hochberg adjustment) and
//! Boruta (hit counting against permuted shadow variables with binomial
//! tests). The [`simgen`] and [`harness`] modules generate benchmark data and
//! run one-at-a-time hyperparameter sweeps over both procedures.

pub mod data;
pub mod error;
pub mod forest;
pub mod harness;
pub mod metrics;
pub mod params;
pub mod rng;
pub mod selection;
pub mod simgen;

pub use data::Dataset;
pub use error::{Error, Result};
pub use forest::{grow_forest, ImportanceReport};
pub use params::HyperParams;
