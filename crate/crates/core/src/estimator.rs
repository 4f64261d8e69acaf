//! Graph estimation by node-wise penalized regression (neighborhood selection).

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::shape::ShapeParam;
use crate::solver::{default_lambda_grid, fit_with_loss, lambda_max_with_loss, Design, FitResult, RegressionLoss, SolverOptions};

/// How two directed neighborhood estimates are merged into one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum CombinationRule {
    /// Keep `(i, j)` only when each node selects the other.
    #[default]
    And,
    /// Keep `(i, j)` when either node selects the other.
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    pub solver: SolverOptions,
    /// Coefficients with magnitude at or below this are treated as zero.
    pub zero_tol: f64,
}

impl SelectionOptions {
    pub const DEFAULT_ZERO_TOL: f64 = 1e-7;
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions { solver: SolverOptions::default(), zero_tol: Self::DEFAULT_ZERO_TOL }
    }
}

/// Maximum number of bisection levels used by [`oracle_tune`].
pub const ORACLE_BISECTION_DEPTH: usize = 6;

/// The scan stops after this many consecutive grid points above the target.
pub const ORACLE_OVERSHOOT_PATIENCE: usize = 3;

fn require_standardized(data: &Dataset) -> Result<()> {
    if !data.is_standardized() {
        return Err(Error::Precondition("data must be standardized before fitting".into()));
    }
    Ok(())
}

/// Design for regressing column `i` on every other column, in ascending order.
pub fn node_design(data: &Dataset, i: usize) -> Result<Design<'_>> {
    if i >= data.p() {
        return Err(Error::InvalidParameter(alloc::format!("node {i} out of range")));
    }
    let cols = (0..data.p()).filter(|&j| j != i).map(|j| data.column(j)).collect();
    Design::new(data.n(), cols)
}

/// Index of node `j` inside node `i`'s coefficient vector.
#[inline]
pub fn neighbor_slot(i: usize, j: usize) -> usize {
    if j < i {
        j
    } else {
        j - 1
    }
}

pub fn node_lambda_max(data: &Dataset, i: usize, loss: &RegressionLoss) -> Result<f64> {
    let design = node_design(data, i)?;
    lambda_max_with_loss(&design, data.column(i), loss).map_err(|e| e.at_node(i))
}

/// Smallest penalty at which every node-wise regression is empty.
pub fn graph_lambda_max(data: &Dataset, loss: &RegressionLoss) -> Result<f64> {
    let mut m = 0.0f64;
    for i in 0..data.p() {
        m = m.max(node_lambda_max(data, i, loss)?);
    }
    Ok(m)
}

pub fn fit_neighborhood_with_loss(
    data: &Dataset,
    i: usize,
    lambda: f64,
    loss: &RegressionLoss,
    options: &SelectionOptions,
    warm_start: Option<&[f64]>,
) -> Result<FitResult> {
    require_standardized(data)?;
    let design = node_design(data, i)?;
    fit_with_loss(&design, data.column(i), loss, lambda, &options.solver, warm_start).map_err(|e| e.at_node(i))
}

/// ℓν-penalized regression of node `i` on the others; entry `m` belongs to
/// node `m` for `m < i` and node `m + 1` otherwise.
pub fn fit_neighborhood(
    data: &Dataset,
    i: usize,
    lambda: f64,
    nu: ShapeParam,
    options: &SelectionOptions,
) -> Result<Vec<f64>> {
    Ok(fit_neighborhood_with_loss(data, i, lambda, &RegressionLoss::Power(nu), options, None)?.coefficients)
}

pub fn assemble_graph(neighborhoods: &[Vec<f64>], rule: CombinationRule, zero_tol: f64) -> Result<Graph> {
    let p = neighborhoods.len();
    for nb in neighborhoods {
        if nb.len() + 1 != p {
            return Err(Error::DimensionMismatch { expected: p.saturating_sub(1), found: nb.len() });
        }
    }
    let mut g = Graph::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let a = neighborhoods[i][neighbor_slot(i, j)].abs() > zero_tol;
            let b = neighborhoods[j][neighbor_slot(j, i)].abs() > zero_tol;
            let keep = match rule {
                CombinationRule::And => a && b,
                CombinationRule::Or => a || b,
            };
            if keep {
                g.insert(i, j)?;
            }
        }
    }
    Ok(g)
}

/// Node-wise coefficient vectors; used as warm-start state along paths.
pub type NodeCoefficients = Vec<Vec<f64>>;

fn fit_all_nodes(
    data: &Dataset,
    lambda: f64,
    loss: &RegressionLoss,
    options: &SelectionOptions,
    warm: Option<&NodeCoefficients>,
) -> Result<NodeCoefficients> {
    (0..data.p())
        .map(|i| {
            let w = warm.map(|w| w[i].as_slice());
            fit_neighborhood_with_loss(data, i, lambda, loss, options, w).map(|f| f.coefficients)
        })
        .collect()
}

pub fn fit_graph_with_loss(
    data: &Dataset,
    lambda: f64,
    loss: &RegressionLoss,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Graph> {
    let coefs = fit_all_nodes(data, lambda, loss, options, None)?;
    assemble_graph(&coefs, rule, options.zero_tol)
}

pub fn fit_graph(
    data: &Dataset,
    lambda: f64,
    nu: ShapeParam,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Graph> {
    fit_graph_with_loss(data, lambda, &RegressionLoss::Power(nu), rule, options)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub lambda: f64,
    pub graph: Graph,
}

impl PathPoint {
    pub fn edge_count(&self) -> usize {
        self.graph.len()
    }
}

pub fn edge_path_with_loss(
    data: &Dataset,
    loss: &RegressionLoss,
    lambdas: &[f64],
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Vec<PathPoint>> {
    require_standardized(data)?;
    if lambdas.windows(2).any(|w| !(w[0] > w[1])) || lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidParameter("lambdas must be non-negative and strictly descending".into()));
    }
    let mut warm: Option<NodeCoefficients> = None;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let coefs = fit_all_nodes(data, lambda, loss, options, warm.as_ref()).map_err(|e| e.at_lambda(lambda))?;
        out.push(PathPoint { lambda, graph: assemble_graph(&coefs, rule, options.zero_tol)? });
        warm = Some(coefs);
    }
    Ok(out)
}

/// Graphs along a warm-started path of penalties.
pub fn edge_path(
    data: &Dataset,
    nu: ShapeParam,
    lambdas: &[f64],
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<Vec<PathPoint>> {
    edge_path_with_loss(data, &RegressionLoss::Power(nu), lambdas, rule, options)
}

/// The default path grid for `data`: 50 points from the graph-level
/// `lambda_max` down three decades.
pub fn default_graph_grid(data: &Dataset, loss: &RegressionLoss) -> Result<Vec<f64>> {
    Ok(default_lambda_grid(graph_lambda_max(data, loss)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunedGraph {
    pub lambda: f64,
    pub graph: Graph,
    /// Number of penalties at which the full graph was fitted.
    pub evaluations: usize,
}

/// Ranking key: distance to target, then fewer edges, then larger λ.
fn better(count: usize, lambda: f64, best: &(usize, f64), target: usize) -> bool {
    let d_new = count.abs_diff(target);
    let d_old = best.0.abs_diff(target);
    match d_new.cmp(&d_old) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match count.cmp(&best.0) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => lambda > best.1,
        },
    }
}

/// Search a descending grid for the graph whose edge count is closest to
/// `target`, then bisect (in log λ) between the straddling grid points.
///
/// `eval(lambda, warm)` fits the graph at `lambda` warm-started from the
/// state returned by an earlier evaluation.
pub fn oracle_search<S, F>(grid: &[f64], target: usize, init: S, mut eval: F) -> Result<TunedGraph>
where
    S: Clone,
    F: FnMut(f64, &S) -> Result<(S, Graph)>,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    let mut evaluations = 0usize;
    let mut best: Option<(usize, f64, Graph)> = None;
    let consider = |count: usize, lambda: f64, g: &Graph, best: &mut Option<(usize, f64, Graph)>| {
        let replace = match best {
            None => true,
            Some((c, l, _)) => better(count, lambda, &(*c, *l), target),
        };
        if replace {
            *best = Some((count, lambda, g.clone()));
        }
    };

    // Last grid point below the target and first point above it after that.
    let mut below: Option<(f64, S)> = None;
    let mut above: Option<f64> = None;
    let mut overshoot_run = 0usize;
    let mut state = init;
    for &lambda in grid {
        let (next, g) = eval(lambda, &state)?;
        evaluations += 1;
        let count = g.len();
        consider(count, lambda, &g, &mut best);
        if count == target {
            let (c, l, g) = best.expect("just set");
            debug_assert_eq!(c, target);
            return Ok(TunedGraph { lambda: l, graph: g, evaluations });
        }
        if count < target {
            overshoot_run = 0;
            if above.is_none() {
                below = Some((lambda, next.clone()));
            }
        } else {
            overshoot_run += 1;
            if above.is_none() && below.is_some() {
                above = Some(lambda);
            }
            if overshoot_run >= ORACLE_OVERSHOOT_PATIENCE {
                break;
            }
        }
        state = next;
    }

    if let (Some((mut lo_lambda_hi, mut warm)), Some(mut hi_lambda_lo)) = (below, above) {
        for _ in 0..ORACLE_BISECTION_DEPTH {
            let mid = libm::sqrt(lo_lambda_hi * hi_lambda_lo);
            if !(mid < lo_lambda_hi && mid > hi_lambda_lo) {
                break;
            }
            let (next, g) = eval(mid, &warm)?;
            evaluations += 1;
            let count = g.len();
            consider(count, mid, &g, &mut best);
            match count.cmp(&target) {
                Ordering::Equal => break,
                Ordering::Less => {
                    lo_lambda_hi = mid;
                    warm = next;
                }
                Ordering::Greater => hi_lambda_lo = mid,
            }
        }
    }
    let (_, lambda, graph) = best.expect("grid is non-empty");
    Ok(TunedGraph { lambda, graph, evaluations })
}

/// Choose λ on the default grid so the estimated edge count matches
/// `target_edges` as closely as possible.
pub fn oracle_tune_with_loss(
    data: &Dataset,
    loss: &RegressionLoss,
    target_edges: usize,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<TunedGraph> {
    require_standardized(data)?;
    let lambda_max = graph_lambda_max(data, loss)?;
    if target_edges == 0 {
        return Ok(TunedGraph { lambda: lambda_max, graph: Graph::empty(data.p()), evaluations: 0 });
    }
    let grid = default_lambda_grid(lambda_max);
    let init: NodeCoefficients = (0..data.p()).map(|_| alloc::vec![0.0; data.p() - 1]).collect();
    oracle_search(&grid, target_edges, init, |lambda, warm| {
        let coefs = fit_all_nodes(data, lambda, loss, options, Some(warm)).map_err(|e| e.at_lambda(lambda))?;
        let g = assemble_graph(&coefs, rule, options.zero_tol)?;
        Ok((coefs, g))
    })
}

pub fn oracle_tune(
    data: &Dataset,
    nu: ShapeParam,
    target_edges: usize,
    rule: CombinationRule,
    options: &SelectionOptions,
) -> Result<TunedGraph> {
    oracle_tune_with_loss(data, &RegressionLoss::Power(nu), target_edges, rule, options)
}
