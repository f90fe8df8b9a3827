//! Linear vector-autoregressive Granger baseline on individual-stacked
//! series, with gap filling for missing cells.

mod interpolate;
mod var;

pub use interpolate::{interpolate_missing, Interpolated};
pub use var::{
    fit_and_test, fit_var, Conditioning, LaggedDesign, LinearGcConfig, LinearGcResult, PairTest, VarModel, RIDGE_JITTER,
};

use crate::data::Standardizer;
use crate::error::Result;

/// Gap-fills, optionally standardizes, and tests every ordered pair.
pub fn linear_gc(
    data: &crate::data::LongitudinalDataset,
    cfg: &LinearGcConfig,
) -> Result<(LinearGcResult, Interpolated)> {
    cfg.validate()?;
    let filled = interpolate_missing(data)?;
    let result = if cfg.standardize {
        let std = Standardizer::fit(&filled.data)?;
        fit_and_test(&std.apply(&filled.data)?, cfg)?
    } else {
        fit_and_test(&filled.data, cfg)?
    };
    Ok((result, filled))
}
