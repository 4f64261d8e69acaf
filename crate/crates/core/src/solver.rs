//! Proximal-gradient solver for ℓ1-penalized regressions with a separable
//! smooth loss, most importantly the ℓν-power ("Extreme Lasso") loss
//!
//! ```text
//! (1 / (ν N)) Σ_t (y_t - X_t β)^ν + λ ‖β‖₁
//! ```
//!
//! Each iteration takes a soft-thresholded gradient step. The trial step is
//! the Barzilai–Borwein estimate of the local inverse curvature and is halved
//! until the quadratic majorization inequality holds, which makes every
//! accepted step non-increasing in the objective.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::ShapeParam;
use crate::special::ipow;

/// Borrowed column-major design matrix.
#[derive(Debug, Clone)]
pub struct Design<'a> {
    n: usize,
    columns: Vec<&'a [f64]>,
}

impl<'a> Design<'a> {
    pub fn new(n: usize, columns: Vec<&'a [f64]>) -> Result<Self> {
        for c in &columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
        }
        Ok(Design { n, columns })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of predictors.
    #[inline]
    pub fn k(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &'a [f64] {
        self.columns[j]
    }
}

/// Separable per-observation loss `ℓ(r)` on residuals `r = y - Xβ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionLoss {
    /// `r^ν / ν`.
    Power(ShapeParam),
    /// Check loss `ρ_τ` with the kink replaced by a quadratic on `|r| ≤ width`.
    SmoothedCheck { tau: f64, width: f64 },
}

impl RegressionLoss {
    pub const DEFAULT_CHECK_WIDTH: f64 = 1e-3;

    pub fn power(nu: ShapeParam) -> Self {
        RegressionLoss::Power(nu)
    }

    pub fn check(tau: f64) -> Result<Self> {
        Self::check_with_width(tau, Self::DEFAULT_CHECK_WIDTH)
    }

    pub fn check_with_width(tau: f64, width: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!("quantile level must be in (0,1), got {tau}")));
        }
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("smoothing width must be positive, got {width}")));
        }
        Ok(RegressionLoss::SmoothedCheck { tau, width })
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RegressionLoss::Power(nu) => ipow(r, nu.get()) / nu.as_f64(),
            RegressionLoss::SmoothedCheck { tau, width } => {
                if r > width {
                    tau * (r - 0.5 * width)
                } else if r < -width {
                    (1.0 - tau) * (-r - 0.5 * width)
                } else {
                    let w = if r >= 0.0 { tau } else { 1.0 - tau };
                    w * r * r / (2.0 * width)
                }
            }
        }
    }

    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            RegressionLoss::Power(nu) => ipow(r, nu.get() - 1),
            RegressionLoss::SmoothedCheck { tau, width } => {
                if r > width {
                    tau
                } else if r < -width {
                    tau - 1.0
                } else {
                    let w = if r >= 0.0 { tau } else { 1.0 - tau };
                    w * r / width
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Backtracking factor in (0, 1).
    pub shrink: f64,
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 50_000, shrink: 0.5, initial_step: 1.0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!("shrink must be in (0,1), got {}", self.shrink)));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::InvalidParameter("initial step must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoConfig {
    pub lambda: f64,
    pub nu: ShapeParam,
    pub solver: SolverOptions,
}

impl LassoConfig {
    pub fn new(lambda: f64, nu: ShapeParam) -> Self {
        LassoConfig { lambda, nu, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// ℓ∞ distance from the negative loss gradient to `λ ∂‖β‖₁`, divided by
    /// `max(1, ‖∇loss(0)‖∞)` so that it is comparable across loss scales.
    pub kkt_residual: f64,
    pub converged: bool,
}

impl FitResult {
    pub fn support_size(&self, zero_tol: f64) -> usize {
        self.coefficients.iter().filter(|b| b.abs() > zero_tol).count()
    }
}

#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn check_dims(design: &Design<'_>, y: &[f64], beta: Option<&[f64]>) -> Result<()> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch { expected: design.n(), found: y.len() });
    }
    if let Some(b) = beta {
        if b.len() != design.k() {
            return Err(Error::DimensionMismatch { expected: design.k(), found: b.len() });
        }
    }
    if design.n() == 0 {
        return Err(Error::InvalidParameter("design has no rows".into()));
    }
    Ok(())
}

fn residual_into(design: &Design<'_>, y: &[f64], beta: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(y);
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (r, x) in out.iter_mut().zip(design.column(j)) {
                *r -= b * x;
            }
        }
    }
}

fn mean_loss(loss: &RegressionLoss, resid: &[f64]) -> f64 {
    resid.iter().map(|&r| loss.value(r)).sum::<f64>() / resid.len() as f64
}

/// `-(1/N) Xᵀ ψ(r)` where `ψ` is the loss derivative; `psi` is scratch.
fn gradient_into(
    design: &Design<'_>,
    loss: &RegressionLoss,
    resid: &[f64],
    psi: &mut Vec<f64>,
    out: &mut Vec<f64>,
) {
    psi.clear();
    psi.extend(resid.iter().map(|&r| loss.derivative(r)));
    let inv_n = 1.0 / design.n() as f64;
    out.clear();
    out.extend((0..design.k()).map(|j| {
        let dot: f64 = design.column(j).iter().zip(psi.iter()).map(|(x, w)| x * w).sum();
        -dot * inv_n
    }));
}

fn l1(beta: &[f64]) -> f64 {
    beta.iter().map(|b| b.abs()).sum()
}

fn kkt_distance(beta: &[f64], grad: &[f64], lambda: f64) -> f64 {
    beta.iter()
        .zip(grad)
        .map(|(&b, &g)| {
            if b > 0.0 {
                (g + lambda).abs()
            } else if b < 0.0 {
                (g - lambda).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Penalized objective for an arbitrary separable loss.
pub fn objective_with_loss(
    beta: &[f64],
    design: &Design<'_>,
    y: &[f64],
    lambda: f64,
    loss: &RegressionLoss,
) -> Result<f64> {
    check_dims(design, y, Some(beta))?;
    let mut r = Vec::new();
    residual_into(design, y, beta, &mut r);
    Ok(mean_loss(loss, &r) + lambda * l1(beta))
}

/// `(1/(νN)) Σ (y - Xβ)^ν + λ ‖β‖₁`.
pub fn objective(beta: &[f64], design: &Design<'_>, y: &[f64], lambda: f64, nu: ShapeParam) -> Result<f64> {
    objective_with_loss(beta, design, y, lambda, &RegressionLoss::Power(nu))
}

pub fn loss_gradient_with_loss(
    beta: &[f64],
    design: &Design<'_>,
    y: &[f64],
    loss: &RegressionLoss,
) -> Result<Vec<f64>> {
    check_dims(design, y, Some(beta))?;
    let (mut r, mut psi, mut g) = (Vec::new(), Vec::new(), Vec::new());
    residual_into(design, y, beta, &mut r);
    gradient_into(design, loss, &r, &mut psi, &mut g);
    Ok(g)
}

/// Gradient of the smooth part: `-(1/N) Xᵀ r^{∘(ν-1)}`.
pub fn loss_gradient(beta: &[f64], design: &Design<'_>, y: &[f64], nu: ShapeParam) -> Result<Vec<f64>> {
    loss_gradient_with_loss(beta, design, y, &RegressionLoss::Power(nu))
}

/// Smallest penalty for which `β = 0` is optimal: `‖∇loss(0)‖∞`.
pub fn lambda_max_with_loss(design: &Design<'_>, y: &[f64], loss: &RegressionLoss) -> Result<f64> {
    check_dims(design, y, None)?;
    let (mut psi, mut g) = (Vec::new(), Vec::new());
    gradient_into(design, loss, y, &mut psi, &mut g);
    Ok(g.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

pub fn lambda_max(design: &Design<'_>, y: &[f64], nu: ShapeParam) -> Result<f64> {
    lambda_max_with_loss(design, y, &RegressionLoss::Power(nu))
}

/// Solve the penalized regression from `warm_start` (or zero).
pub fn fit_with_loss(
    design: &Design<'_>,
    y: &[f64],
    loss: &RegressionLoss,
    lambda: f64,
    options: &SolverOptions,
    warm_start: Option<&[f64]>,
) -> Result<FitResult> {
    options.validate()?;
    check_dims(design, y, warm_start)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be non-negative, got {lambda}")));
    }
    let k = design.k();
    let n = design.n();
    let mut beta: Vec<f64> = match warm_start {
        Some(b) => b.to_vec(),
        None => alloc::vec![0.0; k],
    };

    let mut psi = Vec::with_capacity(n);
    let mut resid = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(k);

    // Gradient at the origin fixes the scale of the KKT certificate.
    gradient_into(design, loss, y, &mut psi, &mut grad);
    let kkt_scale = grad.iter().map(|v| v.abs()).fold(1.0, f64::max);

    residual_into(design, y, &beta, &mut resid);
    let mut smooth = mean_loss(loss, &resid);
    if !smooth.is_finite() {
        return Err(Error::Divergence(format!("non-finite loss at start (lambda {lambda})")));
    }
    if beta.iter().any(|&b| b != 0.0) {
        gradient_into(design, loss, &resid, &mut psi, &mut grad);
    }

    let mut kkt = kkt_distance(&beta, &grad, lambda) / kkt_scale;
    let mut cand = alloc::vec![0.0; k];
    let mut cand_resid = Vec::with_capacity(n);
    let mut new_grad = Vec::with_capacity(k);
    let mut step = options.initial_step;
    let mut bb_step: Option<f64> = None;
    let mut iterations = 0usize;

    let mut done = kkt <= options.tol;
    while !done && iterations < options.max_iter {
        iterations += 1;
        let mut s = bb_step.unwrap_or(step);
        let objective_before = smooth + lambda * l1(&beta);

        let accepted_smooth = loop {
            let mut moved = false;
            for j in 0..k {
                cand[j] = soft_threshold(beta[j] - s * grad[j], s * lambda);
                moved |= cand[j] != beta[j];
            }
            if !moved {
                break None;
            }
            residual_into(design, y, &cand, &mut cand_resid);
            let trial = mean_loss(loss, &cand_resid);
            if trial.is_finite() {
                let mut lin = 0.0;
                let mut sq = 0.0;
                for j in 0..k {
                    let d = cand[j] - beta[j];
                    lin += grad[j] * d;
                    sq += d * d;
                }
                let bound = smooth + lin + sq / (2.0 * s);
                let slack = 1e-12 * (smooth.abs() + bound.abs());
                if trial <= bound + slack {
                    break Some(trial);
                }
            }
            s *= options.shrink;
            if s < 1e-300 {
                return Err(Error::Divergence(format!(
                    "step size underflow at iteration {iterations} (lambda {lambda})"
                )));
            }
        };

        let Some(trial) = accepted_smooth else {
            // Prox step is a fixed point: β is optimal for this λ.
            kkt = 0.0;
            break;
        };

        gradient_into(design, loss, &cand_resid, &mut psi, &mut new_grad);

        let mut max_change = 0.0f64;
        let mut ss = 0.0;
        let mut sy = 0.0;
        for j in 0..k {
            let d = cand[j] - beta[j];
            let dg = new_grad[j] - grad[j];
            max_change = max_change.max(d.abs());
            ss += d * d;
            sy += d * dg;
        }
        debug_assert!(
            trial + lambda * l1(&cand) <= objective_before + 1e-9 * objective_before.abs().max(1e-12),
            "objective increased"
        );

        core::mem::swap(&mut beta, &mut cand);
        core::mem::swap(&mut resid, &mut cand_resid);
        core::mem::swap(&mut grad, &mut new_grad);
        smooth = trial;
        step = s;
        bb_step = if sy > 0.0 { Some((ss / sy).clamp(1e-12 * s, 1e12 * s)) } else { None };

        kkt = kkt_distance(&beta, &grad, lambda) / kkt_scale;
        // Either certificate (KKT or gradient mapping) must hold, and the
        // iterate must have settled: flat ν ≥ 4 losses pass the first long
        // before the coefficients stop moving.
        let settled = max_change <= options.tol * beta.iter().fold(1.0, |m, b| b.abs().max(m));
        done = settled && (kkt <= options.tol || max_change / s <= options.tol * kkt_scale);
    }

    let objective = smooth + lambda * l1(&beta);
    if !objective.is_finite() {
        return Err(Error::Divergence(format!("non-finite objective (lambda {lambda})")));
    }
    Ok(FitResult {
        coefficients: beta,
        objective,
        iterations,
        kkt_residual: kkt,
        converged: kkt <= 10.0 * options.tol,
    })
}

/// Extreme Lasso fit: ℓν-power loss with an ℓ1 penalty.
pub fn fit(design: &Design<'_>, y: &[f64], config: &LassoConfig, warm_start: Option<&[f64]>) -> Result<FitResult> {
    fit_with_loss(design, y, &RegressionLoss::Power(config.nu), config.lambda, &config.solver, warm_start)
}

/// `count` log-spaced penalties from `lambda_max` down to `ratio · lambda_max`.
pub fn lambda_grid(lambda_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 || !(lambda_max > 0.0) {
        return alloc::vec![lambda_max.max(0.0); count.min(1)];
    }
    let log_ratio = libm::log(ratio);
    (0..count)
        .map(|t| lambda_max * libm::exp(log_ratio * t as f64 / (count - 1) as f64))
        .collect()
}

pub const DEFAULT_GRID_SIZE: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;

/// The default regularization path grid: 50 points over three decades.
pub fn default_lambda_grid(lambda_max: f64) -> Vec<f64> {
    lambda_grid(lambda_max, DEFAULT_GRID_SIZE, DEFAULT_GRID_RATIO)
}

fn check_descending(lambdas: &[f64]) -> Result<()> {
    for w in lambdas.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::InvalidParameter("lambdas must be strictly descending".into()));
        }
    }
    if lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidParameter("lambdas must be non-negative".into()));
    }
    Ok(())
}

/// Warm-started regularization path over a strictly descending grid.
pub fn path_with_loss(
    design: &Design<'_>,
    y: &[f64],
    loss: &RegressionLoss,
    lambdas: &[f64],
    options: &SolverOptions,
) -> Result<Vec<FitResult>> {
    check_descending(lambdas)?;
    let mut out: Vec<FitResult> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let warm = out.last().map(|f| f.coefficients.as_slice());
        let fit = fit_with_loss(design, y, loss, lambda, options, warm).map_err(|e| e.at_lambda(lambda))?;
        out.push(fit);
    }
    Ok(out)
}

pub fn path(design: &Design<'_>, y: &[f64], nu: ShapeParam, lambdas: &[f64]) -> Result<Vec<FitResult>> {
    path_with_loss(design, y, &RegressionLoss::Power(nu), lambdas, &SolverOptions::default())
}
