//! Comparison estimators: Gaussian neighborhood selection, the quantile
//! graphical model and the block-maxima GEV-copula graphical model.

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{fit_graph, fit_graph_with_loss, fit_neighborhood_with_loss, CombinationRule, SelectionOptions};
use crate::gev::{self, GevParams};
use crate::graph::Graph;
use crate::shape::ShapeParam;
use crate::solver::RegressionLoss;
use crate::special::normal_quantile;

/// Probabilities are clipped to `[CDF_CLIP, 1 - CDF_CLIP]` before the normal
/// quantile so boundary fits give finite scores.
pub const CDF_CLIP: f64 = 1e-10;

/// Neighborhood selection with squared-error loss.
pub fn gaussian_ns(data: &Dataset, lambda: f64, rule: CombinationRule, options: &SelectionOptions) -> Result<Graph> {
    fit_graph(data, lambda, ShapeParam::GAUSSIAN, rule, options)
}

/// ℓ1-penalized quantile regression of node `i` on the others (smoothed
/// check loss).
pub fn quantile_neighborhood(
    data: &Dataset,
    i: usize,
    tau: f64,
    lambda: f64,
    options: &SelectionOptions,
) -> Result<Vec<f64>> {
    let loss = RegressionLoss::check(tau)?;
    Ok(fit_neighborhood_with_loss(data, i, lambda, &loss, options, None)?.coefficients)
}

pub fn quantile_graph(
    data: &Dataset,
    tau: f64,
    lambda: f64,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Graph> {
    fit_graph_with_loss(data, lambda, &RegressionLoss::check(tau)?, rule, options)
}

/// Column-wise maxima over consecutive blocks; a trailing partial block is
/// dropped.
pub fn block_maxima(data: &Dataset, block_size: usize) -> Result<Dataset> {
    if block_size == 0 || data.n() < 2 * block_size {
        return Err(Error::Precondition(alloc::format!(
            "need at least two blocks of size {block_size}, have {} rows",
            data.n()
        )));
    }
    let m = data.n() / block_size;
    let mut values = Vec::with_capacity(m * data.p());
    for j in 0..data.p() {
        let col = data.column(j);
        values.extend(col.chunks_exact(block_size).map(|b| b.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    }
    Dataset::from_columns(m, data.p(), values)
}

/// Block maxima mapped to normal scores through per-column GEV fits,
/// standardized. Also returns the fitted marginals.
pub fn copula_transform(data: &Dataset, block_size: usize) -> Result<(Dataset, Vec<GevParams>)> {
    let maxima = block_maxima(data, block_size)?;
    let m = maxima.n();
    let mut values = Vec::with_capacity(m * data.p());
    let mut fits = Vec::with_capacity(data.p());
    for j in 0..data.p() {
        let col = maxima.column(j);
        let params = gev::fit(col).map_err(|e| e.at_column(j))?;
        values.extend(col.iter().map(|&x| normal_quantile(params.cdf(x).clamp(CDF_CLIP, 1.0 - CDF_CLIP))));
        fits.push(params);
    }
    Ok((Dataset::from_columns(m, data.p(), values)?.standardize()?, fits))
}

/// GEV-copula graphical model: Gaussian neighborhood selection on the
/// normal scores of the block maxima.
pub fn copula_blockmax_graph(
    data: &Dataset,
    block_size: usize,
    lambda: f64,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Graph> {
    let (scores, _) = copula_transform(data, block_size)?;
    gaussian_ns(&scores, lambda, rule, options)
}
