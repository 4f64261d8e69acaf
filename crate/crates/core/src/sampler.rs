//! Gibbs sampling from the joint Subbotin graphical model through its
//! node-wise conditionals.

use alloc::format;
use alloc::vec::Vec;

use libm::pow;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma};

use crate::dataset::Dataset;
use crate::density::conditional_location;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream, StreamRng};
use crate::shape::ShapeParam;
use crate::theta::ParamMatrix;

/// Exact sampler for the standard Subbotin density `∝ exp(-|x|^ν)`:
/// `S · G^{1/ν}` with `G ~ Gamma(1/ν, 1)` and `S` a fair sign.
#[derive(Debug, Clone)]
pub struct SubbotinSampler {
    gamma: Gamma<f64>,
    inv_nu: f64,
}

impl SubbotinSampler {
    pub fn new(nu: ShapeParam) -> Self {
        let inv_nu = 1.0 / nu.as_f64();
        SubbotinSampler { gamma: Gamma::new(inv_nu, 1.0).expect("shape 1/nu is positive"), inv_nu }
    }
}

impl Distribution<f64> for SubbotinSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let magnitude = pow(self.gamma.sample(rng), self.inv_nu);
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

pub fn sample_standard_subbotin<R: Rng + ?Sized>(nu: ShapeParam, rng: &mut R) -> f64 {
    SubbotinSampler::new(nu).sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl GibbsConfig {
    pub const DEFAULT_BURN_IN: usize = 500;
    pub const DEFAULT_THINNING: usize = 2;

    pub fn new(n_samples: usize, seed: u64) -> Self {
        GibbsConfig {
            n_samples,
            burn_in: Self::DEFAULT_BURN_IN,
            thinning: Self::DEFAULT_THINNING,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be positive".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

/// Run one systematic-scan chain started at the origin. Every variate is
/// drawn from its own ChaCha stream indexed by `(sweep, node)`, so the output
/// is a pure function of `(theta, nu, config, chain)`.
pub fn gibbs_sample_chain(
    theta: &ParamMatrix,
    nu: ShapeParam,
    config: &GibbsConfig,
    chain: u64,
) -> Result<Dataset> {
    config.validate()?;
    if !theta.is_normalizable() {
        return Err(Error::NotNormalizable);
    }
    let p = theta.p();
    let n = config.n_samples;
    let noise = SubbotinSampler::new(nu);
    let mut rng = StreamRng::seed_from_u64(derive_seed(config.seed, &[stream::GIBBS, chain]));

    let mut state = alloc::vec![0.0; p];
    let mut out = alloc::vec![0.0; n * p];
    let total_sweeps = config.burn_in + n * config.thinning;
    let mut kept = 0usize;
    for sweep in 0..total_sweeps {
        for i in 0..p {
            rng.set_stream((sweep as u64) * (p as u64) + i as u64);
            rng.set_word_pos(0);
            let (location, scale) = conditional_location(i, &state, theta)?;
            state[i] = location + scale * noise.sample(&mut rng);
        }
        if sweep >= config.burn_in && (sweep - config.burn_in + 1) % config.thinning == 0 {
            for (c, &v) in state.iter().enumerate() {
                out[c * n + kept] = v;
            }
            kept += 1;
        }
    }
    debug_assert_eq!(kept, n);
    if let Some(k) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence(format!("chain produced a non-finite value at row {}", k % n)));
    }
    Dataset::from_columns(n, p, out)
}

pub fn gibbs_sample(theta: &ParamMatrix, nu: ShapeParam, config: &GibbsConfig) -> Result<Dataset> {
    gibbs_sample_chain(theta, nu, config, 0)
}

/// Empirical covariance of the columns (divisor `n - 1`), row-major.
pub fn empirical_covariance(data: &Dataset) -> Vec<f64> {
    let (n, p) = (data.n(), data.p());
    let means: Vec<f64> = (0..p).map(|c| data.column(c).iter().sum::<f64>() / n as f64).collect();
    let mut cov = alloc::vec![0.0; p * p];
    for a in 0..p {
        for b in a..p {
            let (ca, cb) = (data.column(a), data.column(b));
            let s: f64 = ca.iter().zip(cb).map(|(x, y)| (x - means[a]) * (y - means[b])).sum();
            let v = s / (n as f64 - 1.0);
            cov[a * p + b] = v;
            cov[b * p + a] = v;
        }
    }
    cov
}
