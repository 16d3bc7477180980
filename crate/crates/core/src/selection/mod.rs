//! Variable verdicts from forest importance: Vita and Boruta.

mod boruta;
mod stats;
mod vita;

pub use boruta::{
    boruta_select, shadow_extend, BorutaResult, BorutaRound, Decision, DEFAULT_BORUTA_ALPHA, DEFAULT_MAX_ITER,
    WARMUP_ROUNDS,
};
pub use stats::{bh_adjust, binomial_twosided, empirical_pvalue, mirrored_null, BinomialTails};
pub use vita::{vita_from_importance, vita_select, VitaResult, DEFAULT_VITA_ALPHA};

use crate::data::Dataset;
use crate::error::{Error, Result};

fn require_both_classes(data: &Dataset) -> Result<()> {
    if data.has_both_classes() {
        Ok(())
    } else {
        Err(Error::InvalidData("variable selection needs both response classes".into()))
    }
}
