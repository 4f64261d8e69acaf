//! Generalized extreme value distribution: CDF, quantile, likelihood and
//! maximum-likelihood fitting.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::special::{gamma, EULER_GAMMA};

/// Below this `|ξ|` the Gumbel limit is used.
pub const GUMBEL_LIMIT: f64 = 1e-4;

pub const MAX_FIT_EVALUATIONS: usize = 10_000;

pub const MIN_FIT_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevParams {
    pub location: f64,
    pub scale: f64,
    /// Shape `ξ`; 0 is Gumbel, positive is heavy-tailed (Fréchet type).
    pub shape: f64,
}

impl GevParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !location.is_finite() || !shape.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "invalid GEV parameters ({location}, {scale}, {shape})"
            )));
        }
        Ok(GevParams { location, scale, shape })
    }

    fn is_gumbel(&self) -> bool {
        self.shape.abs() < GUMBEL_LIMIT
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.is_gumbel() {
            return libm::exp(-libm::exp(-z));
        }
        let t = 1.0 + self.shape * z;
        if t <= 0.0 {
            return if self.shape > 0.0 { 0.0 } else { 1.0 };
        }
        libm::exp(-libm::pow(t, -1.0 / self.shape))
    }

    /// Inverse CDF for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let y = -libm::log(u);
        if self.is_gumbel() {
            self.location - self.scale * libm::log(y)
        } else {
            self.location + self.scale * (libm::pow(y, -self.shape) - 1.0) / self.shape
        }
    }

    pub fn mean(&self) -> f64 {
        if self.is_gumbel() {
            self.location + self.scale * EULER_GAMMA
        } else if self.shape < 1.0 {
            self.location + self.scale * (gamma(1.0 - self.shape) - 1.0) / self.shape
        } else {
            f64::INFINITY
        }
    }
}

/// Log-likelihood of `samples`; `-inf` outside the support.
pub fn log_likelihood(params: &GevParams, samples: &[f64]) -> f64 {
    let (mu, sigma, xi) = (params.location, params.scale, params.shape);
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = samples.len() as f64;
    let mut ll = -n * libm::log(sigma);
    if params.is_gumbel() {
        for &x in samples {
            let z = (x - mu) / sigma;
            ll -= z + libm::exp(-z);
        }
        return ll;
    }
    for &x in samples {
        let t = 1.0 + xi * (x - mu) / sigma;
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lt = libm::log(t);
        ll -= (1.0 + 1.0 / xi) * lt + libm::exp(-lt / xi);
    }
    ll
}

/// Probability-weighted-moment estimates; a starting point for [`fit`].
pub fn pwm_estimate(samples: &[f64]) -> Result<GevParams> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Precondition(alloc::format!("need at least 3 samples, got {n}")));
    }
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (k, &x) in xs.iter().enumerate() {
        let i = k as f64;
        b0 += x;
        b1 += x * i / (nf - 1.0);
        b2 += x * i * (i - 1.0) / ((nf - 1.0) * (nf - 2.0));
    }
    b0 /= nf;
    b1 /= nf;
    b2 /= nf;
    let l2 = 2.0 * b1 - b0;
    if !(l2 > 0.0) {
        return Err(Error::FitFailure("samples have no spread".into()));
    }
    let c = l2 / (3.0 * b2 - b0) - core::f64::consts::LN_2 / libm::log(3.0);
    // Hosking's approximation; k = -ξ
    let k = (7.8590 * c + 2.9554 * c * c).clamp(-0.9, 0.9);
    let (scale, location) = if k.abs() < GUMBEL_LIMIT {
        let s = l2 / core::f64::consts::LN_2;
        (s, b0 - EULER_GAMMA * s)
    } else {
        let g = gamma(1.0 + k);
        let s = l2 * k / (g * (1.0 - libm::pow(2.0, -k)));
        (s, b0 + s * (g - 1.0) / k)
    };
    GevParams::new(location, scale, -k)
}

/// Maximum-likelihood fit by simplex search from the PWM estimates.
pub fn fit(samples: &[f64]) -> Result<GevParams> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Precondition(alloc::format!(
            "GEV fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let start = pwm_estimate(samples)?;
    // Work on a standardized scale so the simplex tolerances are meaningful.
    let shift = start.location;
    let unit = start.scale;
    let z: Vec<f64> = samples.iter().map(|x| (x - shift) / unit).collect();
    let objective = |v: &[f64]| {
        let p = GevParams { location: v[0], scale: libm::exp(v[1]), shape: v[2] };
        -log_likelihood(&p, &z) / z.len() as f64
    };
    let mut x0 = [0.0, 0.0, start.shape];
    if !objective(&x0).is_finite() {
        x0[2] = 0.0;
    }
    let out = crate::optim::nelder_mead(objective, &x0, &[0.1, 0.1, 0.05], 1e-12, MAX_FIT_EVALUATIONS);
    if !out.converged || !out.value.is_finite() {
        return Err(Error::FitFailure(alloc::format!(
            "no convergence after {} evaluations (negative log-likelihood per sample {}, at location {}, log-scale {}, shape {})",
            out.evaluations,
            out.value,
            out.point[0],
            out.point[1],
            out.point[2]
        )));
    }
    GevParams::new(shift + unit * out.point[0], unit * libm::exp(out.point[1]), out.point[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &xi in &[-0.4, -0.1, -1e-5, 0.0, 1e-5, 0.2, 0.5] {
            let g = GevParams::new(1.5, 2.0, xi).unwrap();
            for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = g.quantile(u);
                assert!((g.cdf(x) - u).abs() < 1e-12, "xi={xi} u={u}");
                assert!((g.quantile(g.cdf(x)) - x).abs() < 1e-8 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn gumbel_mean() {
        let g = GevParams::new(5.0 - EULER_GAMMA, 1.0, 0.0).unwrap();
        assert!((g.mean() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn constant_samples_fail() {
        assert!(fit(&[3.0; 50]).is_err());
        assert!(fit(&[1.0, 2.0]).is_err());
    }
}
