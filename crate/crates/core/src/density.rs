//! Univariate, node-wise conditional and joint (unnormalized) Subbotin densities.
//!
//! The joint log-density is built in the fixed node order `0..p`: node `i`
//! contributes `-(θ_ii x_i - s_i)^ν + s_i^ν` with `s_i = Σ_{j<i} θ_ij x_j`,
//! so that `Q(0) = 0`.

use alloc::format;

use libm::log;

use crate::error::{Error, Result};
use crate::shape::ShapeParam;
use crate::special::{gamma, ipow};
use crate::theta::ParamMatrix;

/// `log(2Γ(1 + 1/ν))`, the log normalizer of `exp(-|x|^ν)`.
pub fn log_normalizer(nu: ShapeParam) -> f64 {
    log(2.0 * gamma((1.0 + nu.as_f64()) / nu.as_f64()))
}

/// Log-density of the standard Subbotin law (location 0, scale 1).
pub fn univariate_log_density(x: f64, nu: ShapeParam) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    Ok(-ipow(x.abs(), nu.get()) - log_normalizer(nu))
}

fn check_len(x: &[f64], p: usize) -> Result<()> {
    if x.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: x.len() });
    }
    Ok(())
}

/// Location and scale of the conditional law of `x_i` given the other
/// coordinates. Entry `x[i]` is ignored.
pub fn conditional_location(i: usize, x: &[f64], theta: &ParamMatrix) -> Result<(f64, f64)> {
    check_len(x, theta.p())?;
    if i >= theta.p() {
        return Err(Error::InvalidParameter(format!("node {i} out of range")));
    }
    let d = theta.diag(i);
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("theta[{i}][{i}] must be positive")));
    }
    let mut s = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        if j != i {
            s += theta.interaction(i, j) * xj;
        }
    }
    Ok((s / d, 1.0 / d))
}

#[inline]
fn lower_sum(i: usize, x: &[f64], theta: &ParamMatrix) -> f64 {
    let mut s = 0.0;
    for j in 0..i {
        s += theta.interaction(i, j) * x[j];
    }
    s
}

#[inline]
fn component(i: usize, x: &[f64], theta: &ParamMatrix, nu: ShapeParam) -> f64 {
    let s = lower_sum(i, x, theta);
    let k = nu.get();
    -ipow(theta.diag(i) * x[i] - s, k) + ipow(s, k)
}

/// The `i`-th summand of the joint log-density `Q`.
pub fn q_component(i: usize, x: &[f64], theta: &ParamMatrix, nu: ShapeParam) -> Result<f64> {
    check_len(x, theta.p())?;
    if i >= theta.p() {
        return Err(Error::InvalidParameter(format!("node {i} out of range")));
    }
    Ok(component(i, x, theta, nu))
}

/// `Q(x) = log(f(x) / f(0))` for the joint Subbotin graphical model.
pub fn log_unnormalized_density(x: &[f64], theta: &ParamMatrix, nu: ShapeParam) -> Result<f64> {
    check_len(x, theta.p())?;
    Ok((0..theta.p()).map(|i| component(i, x, theta, nu)).sum())
}
