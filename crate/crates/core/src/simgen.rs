//! Synthetic data with known dependence graphs: Subbotin Gibbs samples,
//! copula block maxima and Hawkes-driven peaks over threshold.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampler::{gibbs_sample, GibbsConfig};
use crate::seed::{derive_seed, rng_from, stream};
use crate::shape::ShapeParam;
use crate::special::{gumbel_quantile, normal_cdf, normal_quantile, EULER_GAMMA};
use crate::theta::ParamMatrix;

/// Probability that a within-clique edge is moved to a random cross-clique pair.
pub const REWIRE_PROB: f64 = 0.1;

/// Off-diagonal correlation of the filler and background Gaussians.
pub const WEAK_CORRELATION: f64 = 0.1;

/// Off-diagonals smaller than this after positive-definiteness repair make
/// the parameter matrix degenerate.
pub const MIN_REPAIRED_MAGNITUDE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// `k` near-equal cliques with a little random rewiring between them.
    SmallWorldCliques(usize),
    Chain,
    ErdosRenyi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub p: usize,
}

impl GraphSpec {
    pub fn new(kind: GraphKind, p: usize) -> Result<Self> {
        let spec = GraphSpec { kind, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InfeasibleSpec("graph needs at least one node".into()));
        }
        match self.kind {
            GraphKind::SmallWorldCliques(k) if k == 0 || k > self.p => Err(Error::InfeasibleSpec(alloc::format!(
                "{k} cliques cannot partition {} nodes",
                self.p
            ))),
            GraphKind::ErdosRenyi(q) if !(q > 0.0 && q < 1.0) => {
                Err(Error::InfeasibleSpec(alloc::format!("edge probability {q} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// Sizes of `k` near-equal contiguous blocks covering `p` nodes.
pub fn clique_sizes(p: usize, k: usize) -> Vec<usize> {
    (0..k).map(|b| p / k + usize::from(b < p % k)).collect()
}

pub fn make_graph<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> Result<Graph> {
    spec.validate()?;
    let p = spec.p;
    match spec.kind {
        GraphKind::Chain => Graph::from_edges(p, (1..p).map(|i| (i - 1, i))),
        GraphKind::ErdosRenyi(q) => {
            let mut g = Graph::empty(p);
            for i in 0..p {
                for j in (i + 1)..p {
                    if rng.random::<f64>() < q {
                        g.insert(i, j)?;
                    }
                }
            }
            Ok(g)
        }
        GraphKind::SmallWorldCliques(k) => {
            let mut block = Vec::with_capacity(p);
            for (b, size) in clique_sizes(p, k).into_iter().enumerate() {
                block.extend(core::iter::repeat_n(b, size));
            }
            let mut g = Graph::empty(p);
            for i in 0..p {
                for j in (i + 1)..p {
                    if block[i] == block[j] {
                        g.insert(i, j)?;
                    }
                }
            }
            let cross_pairs: usize = {
                let within = g.len();
                p * (p - 1) / 2 - within
            };
            if cross_pairs == 0 {
                return Ok(g);
            }
            let original: Vec<_> = g.edges().collect();
            for (i, j) in original {
                if rng.random::<f64>() >= REWIRE_PROB {
                    continue;
                }
                // a free cross-clique pair always exists: every rewire consumes
                // one within-clique edge and one cross pair, and there are
                // never more rewires than within-clique edges
                let free_cross = (0..p)
                    .flat_map(|a| ((a + 1)..p).map(move |b| (a, b)))
                    .filter(|&(a, b)| block[a] != block[b] && !g.contains(a, b))
                    .count();
                if free_cross == 0 {
                    continue;
                }
                let mut pick = rng.random_range(0..free_cross);
                'outer: for a in 0..p {
                    for b in (a + 1)..p {
                        if block[a] != block[b] && !g.contains(a, b) {
                            if pick == 0 {
                                g.remove(i, j);
                                g.insert(a, b)?;
                                break 'outer;
                            }
                            pick -= 1;
                        }
                    }
                }
            }
            Ok(g)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignScheme {
    #[default]
    AllPositive,
    RandomSign,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSpec {
    /// Interaction strength `|θ_ij|` on edges before repair.
    pub magnitude: f64,
    pub sign_scheme: SignScheme,
    /// Smallest eigenvalue allowed without repair.
    pub pd_margin: f64,
}

impl Default for ThetaSpec {
    fn default() -> Self {
        ThetaSpec { magnitude: 0.2, sign_scheme: SignScheme::AllPositive, pd_margin: 0.05 }
    }
}

impl ThetaSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude > 0.0) || !self.magnitude.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("magnitude must be positive, got {}", self.magnitude)));
        }
        if !(self.pd_margin > 0.0) || !self.pd_margin.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("pd_margin must be positive, got {}", self.pd_margin)));
        }
        Ok(())
    }
}

/// Unit-diagonal parameter matrix supported on `graph`, with interactions
/// `±magnitude`, repaired to be comfortably positive definite.
pub fn make_theta<R: Rng + ?Sized>(graph: &Graph, spec: &ThetaSpec, rng: &mut R) -> Result<ParamMatrix> {
    spec.validate()?;
    let p = graph.p();
    let mut values = alloc::vec![0.0; p * p];
    for i in 0..p {
        values[i * p + i] = 1.0;
    }
    for (i, j) in graph.edges() {
        let sign = match spec.sign_scheme {
            SignScheme::AllPositive => 1.0,
            SignScheme::RandomSign => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        // precision form stores the negated interaction
        values[i * p + j] = -sign * spec.magnitude;
        values[j * p + i] = -sign * spec.magnitude;
    }
    let raw = ParamMatrix::from_precision_form(p, values.clone())?;
    let lambda_min = raw.min_eigenvalue();
    if lambda_min <= spec.pd_margin {
        let shift = spec.pd_margin - lambda_min;
        let scale = 1.0 / (1.0 + shift);
        if !graph.is_empty() && spec.magnitude * scale < MIN_REPAIRED_MAGNITUDE {
            return Err(Error::DegenerateTheta(alloc::format!(
                "repair shrinks interactions to {:e}",
                spec.magnitude * scale
            )));
        }
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    values[i * p + j] *= scale;
                }
            }
        }
    }
    let theta = ParamMatrix::from_precision_form(p, values)?;
    debug_assert!(theta.is_normalizable());
    Ok(theta)
}

/// Gibbs samples from the Subbotin graphical model on a random graph,
/// standardized, with the true graph.
pub fn gen_subbotin(n: usize, nu: ShapeParam, gspec: &GraphSpec, tspec: &ThetaSpec, seed: u64) -> Result<(Dataset, Graph)> {
    let graph = make_graph(gspec, &mut rng_from(seed, &[stream::GRAPH]))?;
    let theta = make_theta(&graph, tspec, &mut rng_from(seed, &[stream::THETA]))?;
    let config = GibbsConfig::new(n, derive_seed(seed, &[stream::GIBBS]));
    let data = gibbs_sample(&theta, nu, &config)?;
    Ok((data.standardize()?, graph))
}

fn cholesky_lower(precision: DMatrix<f64>) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(precision)
        .map(|c| c.l())
        .ok_or(Error::NotNormalizable)
}

/// Draws `x ~ N(0, P⁻¹)` for a positive-definite precision `P = L Lᵀ`.
struct PrecisionGaussian {
    l: DMatrix<f64>,
    sd: Vec<f64>,
}

impl PrecisionGaussian {
    fn new(theta: &ParamMatrix) -> Result<Self> {
        let p = theta.p();
        let l = cholesky_lower(theta.to_dmatrix())?;
        let cov = theta.to_dmatrix().try_inverse().ok_or(Error::NotNormalizable)?;
        let sd = (0..p).map(|j| libm::sqrt(cov[(j, j)])).collect();
        Ok(PrecisionGaussian { l, sd })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let p = out.len();
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        // back-substitution with Lᵀ
        for i in (0..p).rev() {
            let mut s = out[i];
            for k in (i + 1)..p {
                s -= self.l[(k, i)] * out[k];
            }
            out[i] = s / self.l[(i, i)];
        }
    }
}

/// Equicorrelated Gaussian rows (unit variance, correlation `rho`) truncated
/// above per column, by whole-row rejection.
struct WeakGaussian {
    load: f64,
    idio: f64,
}

impl WeakGaussian {
    const MAX_REJECTIONS: usize = 10_000;

    fn new(rho: f64) -> Self {
        WeakGaussian { load: libm::sqrt(rho), idio: libm::sqrt(1.0 - rho) }
    }

    fn sample_below<R: Rng + ?Sized>(&self, bounds: &[f64], rng: &mut R, out: &mut [f64]) {
        for _ in 0..Self::MAX_REJECTIONS {
            let w: f64 = StandardNormal.sample(rng);
            let mut ok = true;
            for (v, &b) in out.iter_mut().zip(bounds) {
                let e: f64 = StandardNormal.sample(rng);
                *v = self.load * w + self.idio * e;
                ok &= *v < b;
            }
            if ok {
                return;
            }
        }
        // Very low bounds: truncate each coordinate given the common factor.
        let w: f64 = StandardNormal.sample(rng);
        for (v, &b) in out.iter_mut().zip(bounds) {
            let c = (b - self.load * w) / self.idio;
            let u = rng.random::<f64>() * normal_cdf(c);
            let mut e = normal_quantile(u.max(f64::MIN_POSITIVE));
            if e >= c {
                e = c - 1e-12 * (1.0 + c.abs());
            }
            *v = self.load * w + self.idio * e;
        }
    }
}

/// Location of the Gumbel law with unit scale and mean 5.
pub const BLOCK_MAXIMA_LOCATION: f64 = 5.0 - EULER_GAMMA;

/// Block maxima with a Gaussian-copula dependence graph: per block one row
/// carries Gumbel(mean 5) margins of a sparse-precision Gaussian; the other
/// rows are weakly correlated Gaussian filler kept below it.
pub fn gen_block_maxima(
    n_blocks: usize,
    block_size: usize,
    gspec: &GraphSpec,
    tspec: &ThetaSpec,
    seed: u64,
) -> Result<(Dataset, Graph)> {
    if block_size < 2 {
        return Err(Error::InvalidParameter(alloc::format!("block size must be >= 2, got {block_size}")));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidParameter("need at least one block".into()));
    }
    let p = gspec.p;
    let graph = make_graph(gspec, &mut rng_from(seed, &[stream::GRAPH]))?;
    let theta = make_theta(&graph, tspec, &mut rng_from(seed, &[stream::THETA]))?;
    let gauss = PrecisionGaussian::new(&theta)?;
    let filler = WeakGaussian::new(WEAK_CORRELATION);
    let mut g_rng = rng_from(seed, &[stream::GAUSSIAN]);
    let mut f_rng = rng_from(seed, &[stream::FILLER]);
    let mut pos_rng = rng_from(seed, &[stream::PLACEMENT]);

    let n = n_blocks * block_size;
    let mut values = alloc::vec![0.0; n * p];
    let mut x = alloc::vec![0.0; p];
    let mut extreme = alloc::vec![0.0; p];
    let mut row = alloc::vec![0.0; p];
    for b in 0..n_blocks {
        gauss.sample(&mut g_rng, &mut x);
        for j in 0..p {
            let u = normal_cdf(x[j] / gauss.sd[j]).clamp(1e-300, 1.0 - 1e-16);
            extreme[j] = gumbel_quantile(u, BLOCK_MAXIMA_LOCATION, 1.0);
        }
        let at = pos_rng.random_range(0..block_size);
        for k in 0..block_size {
            let r = b * block_size + k;
            if k == at {
                row.copy_from_slice(&extreme);
            } else {
                filler.sample_below(&extreme, &mut f_rng, &mut row);
            }
            for j in 0..p {
                values[j * n + r] = row[j];
            }
        }
    }
    Ok((Dataset::from_columns(n, p, values)?, graph))
}

/// Multivariate Hawkes process with exponential kernels whose excitation
/// pattern follows the truth graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HawkesParams {
    /// Baseline intensity per node; `None` picks it so the mean stationary
    /// event rate per node equals `target_rate`.
    pub baseline: Option<f64>,
    pub target_rate: f64,
    /// Kernel decay `β`: an event at `s` adds `α e^{-β (t - s)}`.
    pub decay: f64,
    /// Spectral radius of the branching matrix `α / β`.
    pub branching_radius: f64,
}

impl Default for HawkesParams {
    fn default() -> Self {
        HawkesParams { baseline: None, target_rate: 1.0 / 400.0, decay: 1.0, branching_radius: 0.5 }
    }
}

impl HawkesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.branching_radius >= 0.0) || self.branching_radius >= 1.0 {
            return Err(Error::UnstableHawkes(self.branching_radius));
        }
        if !(self.decay > 0.0) || !self.decay.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("decay must be positive, got {}", self.decay)));
        }
        match self.baseline {
            Some(b) if !(b > 0.0) || !b.is_finite() => {
                Err(Error::InvalidParameter(alloc::format!("baseline must be positive, got {b}")))
            }
            None if !(self.target_rate > 0.0) || !self.target_rate.is_finite() => Err(Error::InvalidParameter(
                alloc::format!("target rate must be positive, got {}", self.target_rate),
            )),
            _ => Ok(()),
        }
    }
}

/// Excitation matrix (`alpha[i * p + j]`: effect of an event at `j` on `i`)
/// and baseline intensity for `graph`.
pub fn hawkes_design(graph: &Graph, params: &HawkesParams) -> Result<(Vec<f64>, f64)> {
    params.validate()?;
    let p = graph.p();
    let adj = graph.adjacency();
    let rho = if graph.is_empty() {
        0.0
    } else {
        let m = DMatrix::from_row_slice(p, p, &adj);
        m.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    };
    let c = if rho > 0.0 { params.branching_radius / rho } else { 0.0 };
    let alpha: Vec<f64> = adj.iter().map(|a| a * c * params.decay).collect();
    let baseline = match params.baseline {
        Some(b) => b,
        None => {
            // stationary rates solve (I - G) Λ = μ 1 with G = c · adjacency
            let mut i_minus_g = DMatrix::<f64>::identity(p, p);
            for i in 0..p {
                for j in 0..p {
                    i_minus_g[(i, j)] -= c * adj[i * p + j];
                }
            }
            let ones = nalgebra::DVector::from_element(p, 1.0);
            let per_unit = i_minus_g
                .lu()
                .solve(&ones)
                .ok_or_else(|| Error::UnstableHawkes(params.branching_radius))?;
            params.target_rate * p as f64 / per_unit.sum()
        }
    };
    Ok((alpha, baseline))
}

/// Event times and nodes on `[0, horizon)` by Ogata thinning.
pub fn simulate_hawkes<R: Rng + ?Sized>(
    p: usize,
    alpha: &[f64],
    baseline: f64,
    decay: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<(f64, usize)>> {
    if alpha.len() != p * p {
        return Err(Error::DimensionMismatch { expected: p * p, found: alpha.len() });
    }
    let mut excitation = alloc::vec![0.0; p];
    let mut events = Vec::new();
    let mut t = 0.0;
    let base_total = baseline * p as f64;
    loop {
        let bound = base_total + excitation.iter().sum::<f64>();
        if !(bound > 0.0) {
            break;
        }
        let u: f64 = rng.random();
        let wait = -libm::log(1.0 - u) / bound;
        t += wait;
        if t >= horizon {
            break;
        }
        let factor = libm::exp(-decay * wait);
        for e in excitation.iter_mut() {
            *e *= factor;
        }
        let total = base_total + excitation.iter().sum::<f64>();
        let v: f64 = rng.random::<f64>() * bound;
        if v >= total {
            continue;
        }
        let mut acc = 0.0;
        let mut node = p - 1;
        for (i, e) in excitation.iter().enumerate() {
            acc += baseline + e;
            if v < acc {
                node = i;
                break;
            }
        }
        events.push((t, node));
        for (i, e) in excitation.iter_mut().enumerate() {
            *e += alpha[i * p + node];
        }
    }
    Ok(events)
}

/// Standard Gumbel draw conditioned to be positive.
fn positive_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let lo = libm::exp(-1.0);
    loop {
        let u = lo + (1.0 - lo) * rng.random::<f64>();
        if u < 1.0 {
            let g = gumbel_quantile(u, 0.0, 1.0);
            if g > 0.0 {
                return g;
            }
        }
    }
}

/// Peaks over threshold: Hawkes events land in row `⌊t⌋` as
/// `threshold + positive Gumbel`; every other cell is weakly correlated
/// Gaussian background kept below the threshold.
pub fn gen_pot(
    n: usize,
    threshold: f64,
    gspec: &GraphSpec,
    hawkes: &HawkesParams,
    seed: u64,
) -> Result<(Dataset, Graph)> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("threshold must be positive, got {threshold}")));
    }
    let p = gspec.p;
    let graph = make_graph(gspec, &mut rng_from(seed, &[stream::GRAPH]))?;
    let (alpha, baseline) = hawkes_design(&graph, hawkes)?;
    let events = simulate_hawkes(p, &alpha, baseline, hawkes.decay, n as f64, &mut rng_from(seed, &[stream::HAWKES]))?;

    let background = WeakGaussian::new(WEAK_CORRELATION);
    let bounds = alloc::vec![threshold; p];
    let mut b_rng = rng_from(seed, &[stream::FILLER]);
    let mut m_rng = rng_from(seed, &[stream::MAGNITUDE]);
    let mut values = alloc::vec![0.0; n * p];
    let mut row = alloc::vec![0.0; p];
    for r in 0..n {
        background.sample_below(&bounds, &mut b_rng, &mut row);
        for j in 0..p {
            values[j * n + r] = row[j];
        }
    }
    for (t, j) in events {
        let r = (libm::floor(t) as usize).min(n - 1);
        let v = threshold + positive_gumbel(&mut m_rng);
        let cell = &mut values[j * n + r];
        if *cell < threshold || v > *cell {
            *cell = v;
        }
    }
    Ok((Dataset::from_columns(n, p, values)?, graph))
}
