//! Stability selection of `(ν, λ)` over stationary block-bootstrap resamples.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{edge_path_with_loss, graph_lambda_max, CombinationRule, SelectionOptions};
use crate::graph::Graph;
use crate::seed::{rng_from, stream};
use crate::shape::ShapeParam;
use crate::solver::{lambda_grid, RegressionLoss};

pub const DEFAULT_REPLICATES: usize = 50;

/// Number of penalties in [`stability_grid`].
pub const DEFAULT_STABILITY_GRID_SIZE: usize = 20;

/// Per-edge selection frequencies at one `(loss, λ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityProfile {
    p: usize,
    frequencies: Vec<f64>,
    replicates: usize,
    failed_replicates: usize,
    loss: RegressionLoss,
    lambda: f64,
}

impl StabilityProfile {
    /// Build a profile from per-edge selection counts (row-major, `p × p`).
    pub fn from_counts(
        p: usize,
        counts: &[usize],
        replicates: usize,
        failed_replicates: usize,
        loss: RegressionLoss,
        lambda: f64,
    ) -> Result<Self> {
        if counts.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, found: counts.len() });
        }
        if replicates == 0 || counts.iter().any(|&c| c > replicates) {
            return Err(Error::InvalidParameter("selection counts exceed the replicate count".into()));
        }
        let mut frequencies = alloc::vec![0.0; p * p];
        for i in 0..p {
            for j in (i + 1)..p {
                if counts[i * p + j] != counts[j * p + i] {
                    return Err(Error::InvalidParameter("selection counts must be symmetric".into()));
                }
                let f = counts[i * p + j] as f64 / replicates as f64;
                frequencies[i * p + j] = f;
                frequencies[j * p + i] = f;
            }
        }
        Ok(StabilityProfile { p, frequencies, replicates, failed_replicates, loss, lambda })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        self.frequencies[i * self.p + j]
    }

    /// Row-major `p × p` frequency matrix with zero diagonal.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// Replicates whose resample or fit failed; they count as selecting nothing.
    pub fn failed_replicates(&self) -> usize {
        self.failed_replicates
    }

    pub fn loss(&self) -> RegressionLoss {
        self.loss
    }

    pub fn nu(&self) -> Option<ShapeParam> {
        match self.loss {
            RegressionLoss::Power(nu) => Some(nu),
            RegressionLoss::SmoothedCheck { .. } => None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(i, j, frequency)` for every pair `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = self.p;
        (0..p).flat_map(move |i| ((i + 1)..p).map(move |j| (i, j, self.frequencies[i * p + j])))
    }
}

/// `⌈√n⌉`.
pub fn default_mean_block_len(n: usize) -> f64 {
    libm::ceil(libm::sqrt(n as f64))
}

/// Row indices of one stationary bootstrap resample: blocks start at uniform
/// positions, have geometric lengths with the given mean and wrap around.
pub fn stationary_bootstrap_indices<R: Rng + ?Sized>(n: usize, mean_block_len: f64, rng: &mut R) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::Precondition(alloc::format!("bootstrap needs n >= 2, got {n}")));
    }
    if !(mean_block_len >= 1.0) || !mean_block_len.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "mean block length must be a finite value >= 1, got {mean_block_len}"
        )));
    }
    let extra = Geometric::new(1.0 / mean_block_len).map_err(|e| Error::InvalidParameter(alloc::format!("{e}")))?;
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let start = rng.random_range(0..n);
        let len = 1 + extra.sample(rng) as usize;
        for k in 0..len.min(n - rows.len()) {
            rows.push((start + k) % n);
        }
    }
    Ok(rows)
}

pub fn stationary_block_bootstrap<R: Rng + ?Sized>(data: &Dataset, mean_block_len: f64, rng: &mut R) -> Result<Dataset> {
    let rows = stationary_bootstrap_indices(data.n(), mean_block_len, rng)?;
    Ok(data.select_rows(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub selection: SelectionOptions,
    /// `None` means `⌈√n⌉`.
    pub mean_block_len: Option<f64>,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { selection: SelectionOptions::default(), mean_block_len: None }
    }
}

/// Graphs selected on bootstrap replicate `replicate` at every penalty in
/// `lambdas`, or `None` if the resample could not be standardized or fitted.
///
/// The resample depends only on `(seed, replicate)`, so every loss and
/// penalty sees the same bootstrap rows.
pub fn replicate_graphs(
    data: &Dataset,
    loss: &RegressionLoss,
    lambdas: &[f64],
    rule: CombinationRule,
    seed: u64,
    replicate: usize,
    options: &StabilityOptions,
) -> Option<Vec<Graph>> {
    let block = options.mean_block_len.unwrap_or_else(|| default_mean_block_len(data.n()));
    let mut rng = rng_from(seed, &[stream::BOOTSTRAP, replicate as u64]);
    let resample = stationary_block_bootstrap(data, block, &mut rng).ok()?.standardize().ok()?;
    let path = edge_path_with_loss(&resample, loss, lambdas, rule, &options.selection).ok()?;
    Some(path.into_iter().map(|pt| pt.graph).collect())
}

/// Fold per-replicate graphs (as returned by [`replicate_graphs`], in
/// replicate order) into one profile per penalty.
pub fn aggregate_replicates(
    p: usize,
    loss: RegressionLoss,
    lambdas: &[f64],
    replicates: &[Option<Vec<Graph>>],
) -> Result<Vec<StabilityProfile>> {
    let mut counts = alloc::vec![alloc::vec![0usize; p * p]; lambdas.len()];
    let mut failed = 0usize;
    for rep in replicates {
        match rep {
            None => failed += 1,
            Some(graphs) => {
                if graphs.len() != lambdas.len() {
                    return Err(Error::DimensionMismatch { expected: lambdas.len(), found: graphs.len() });
                }
                for (c, g) in counts.iter_mut().zip(graphs) {
                    for (i, j) in g.edges() {
                        c[i * p + j] += 1;
                        c[j * p + i] += 1;
                    }
                }
            }
        }
    }
    counts
        .iter()
        .zip(lambdas)
        .map(|(c, &lambda)| StabilityProfile::from_counts(p, c, replicates.len(), failed, loss, lambda))
        .collect()
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need at least 2 replicates, got {replicates}")));
    }
    Ok(())
}

/// Profiles along a descending penalty grid, sharing resamples across penalties.
pub fn stability_path(
    data: &Dataset,
    loss: &RegressionLoss,
    lambdas: &[f64],
    replicates: usize,
    rule: CombinationRule,
    seed: u64,
    options: &StabilityOptions,
) -> Result<Vec<StabilityProfile>> {
    check_replicates(replicates)?;
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] > w[1])) || lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidParameter("lambdas must be non-negative and strictly descending".into()));
    }
    let reps: Vec<_> = (0..replicates).map(|r| replicate_graphs(data, loss, lambdas, rule, seed, r, options)).collect();
    aggregate_replicates(data.p(), *loss, lambdas, &reps)
}

pub fn edge_stability(
    data: &Dataset,
    nu: ShapeParam,
    lambda: f64,
    replicates: usize,
    rule: CombinationRule,
    seed: u64,
    options: &StabilityOptions,
) -> Result<StabilityProfile> {
    let mut path = stability_path(data, &RegressionLoss::Power(nu), &[lambda], replicates, rule, seed, options)?;
    Ok(path.remove(0))
}

/// Edges selected in at least a `threshold` fraction of replicates.
pub fn select_stable_graph(profile: &StabilityProfile, threshold: f64) -> Result<Graph> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("threshold must lie in (0, 1], got {threshold}")));
    }
    Graph::from_edges(profile.p(), profile.entries().filter(|&(_, _, f)| f >= threshold).map(|(i, j, _)| (i, j)))
}

/// Penalty grid for stability selection: from the data's `lambda_max` down
/// to the `lambda_max` of a column-wise permuted copy, below which edges are
/// selected on noise alone. Falls back to `[lambda_max]` when the two meet.
pub fn stability_grid(data: &Dataset, loss: &RegressionLoss, count: usize, seed: u64) -> Result<Vec<f64>> {
    let top = graph_lambda_max(data, loss)?;
    let floor = permutation_lambda_max(data, loss, seed)?;
    if !(top > 0.0) || !(floor > 0.0) || floor >= top || count < 2 {
        return Ok(alloc::vec![top]);
    }
    Ok(lambda_grid(top, count, floor / top))
}

/// `lambda_max` after independently shuffling the rows of every column.
pub fn permutation_lambda_max(data: &Dataset, loss: &RegressionLoss, seed: u64) -> Result<f64> {
    let (n, p) = (data.n(), data.p());
    let mut values = Vec::with_capacity(n * p);
    for j in 0..p {
        let mut rng = rng_from(seed, &[stream::PERMUTATION, j as u64]);
        let mut col = data.column(j).to_vec();
        for k in (1..n).rev() {
            col.swap(k, rng.random_range(0..=k));
        }
        values.extend_from_slice(&col);
    }
    let shuffled = Dataset::from_columns(n, p, values)?.standardize()?;
    graph_lambda_max(&shuffled, loss)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub loss: RegressionLoss,
    pub lambda: f64,
    pub graph: Graph,
    /// One profile path per candidate loss, in input order.
    pub profiles: Vec<Vec<StabilityProfile>>,
}

impl TuneOutcome {
    pub fn nu(&self) -> Option<ShapeParam> {
        match self.loss {
            RegressionLoss::Power(nu) => Some(nu),
            RegressionLoss::SmoothedCheck { .. } => None,
        }
    }
}

/// Pick the `(loss, λ)` with the most stable edges; ties go to larger λ, then
/// to the earlier loss in `profiles`. Penalties of different losses live on
/// different scales, so λ is compared relative to the top of its own path.
pub fn choose_most_stable(profiles: &[Vec<StabilityProfile>], threshold: f64) -> Result<(usize, usize, Graph)> {
    let relative = |a: usize, b: usize| {
        let top = profiles[a][0].lambda();
        if top > 0.0 {
            profiles[a][b].lambda() / top
        } else {
            1.0
        }
    };
    let mut best: Option<(usize, usize, Graph)> = None;
    for (a, path) in profiles.iter().enumerate() {
        for (b, prof) in path.iter().enumerate() {
            let g = select_stable_graph(prof, threshold)?;
            let replace = match &best {
                None => true,
                Some((ba, bb, bg)) => g.len() > bg.len() || (g.len() == bg.len() && relative(a, b) > relative(*ba, *bb)),
            };
            if replace {
                best = Some((a, b, g));
            }
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty tuning grid".into()))
}

/// Stability selection over candidate losses, each with its own descending
/// penalty grid.
#[allow(clippy::too_many_arguments)]
pub fn tune_with_losses(
    data: &Dataset,
    losses: &[RegressionLoss],
    lambda_grids: &[Vec<f64>],
    replicates: usize,
    threshold: f64,
    rule: CombinationRule,
    seed: u64,
    options: &StabilityOptions,
) -> Result<TuneOutcome> {
    if losses.is_empty() || losses.len() != lambda_grids.len() {
        return Err(Error::InvalidParameter("need one non-empty penalty grid per candidate".into()));
    }
    let profiles = losses
        .iter()
        .zip(lambda_grids)
        .map(|(loss, grid)| stability_path(data, loss, grid, replicates, rule, seed, options))
        .collect::<Result<Vec<_>>>()?;
    let (a, b, graph) = choose_most_stable(&profiles, threshold)?;
    Ok(TuneOutcome { loss: losses[a], lambda: profiles[a][b].lambda(), graph, profiles })
}

/// Stability selection over `nu_grid × lambda_grids[k]`. Penalties are not
/// comparable across shapes, so each shape carries its own grid. Shapes
/// should be listed in increasing order for the "smaller ν wins ties" rule.
#[allow(clippy::too_many_arguments)]
pub fn tune(
    data: &Dataset,
    nu_grid: &[ShapeParam],
    lambda_grids: &[Vec<f64>],
    replicates: usize,
    threshold: f64,
    rule: CombinationRule,
    seed: u64,
    options: &StabilityOptions,
) -> Result<TuneOutcome> {
    let mut order: Vec<usize> = (0..nu_grid.len()).collect();
    order.sort_by_key(|&k| nu_grid[k]);
    let losses: Vec<_> = order.iter().map(|&k| RegressionLoss::Power(nu_grid[k])).collect();
    let grids: Vec<_> = order.iter().map(|&k| lambda_grids.get(k).cloned().unwrap_or_default()).collect();
    if lambda_grids.len() != nu_grid.len() {
        return Err(Error::InvalidParameter("need one penalty grid per shape".into()));
    }
    let mut out = tune_with_losses(data, &losses, &grids, replicates, threshold, rule, seed, options)?;
    // report profiles in the caller's order
    let mut profiles: Vec<Vec<StabilityProfile>> = alloc::vec![Vec::new(); nu_grid.len()];
    for (pos, &k) in order.iter().enumerate() {
        profiles[k] = core::mem::take(&mut out.profiles[pos]);
    }
    out.profiles = profiles;
    Ok(out)
}
