//! The symmetric parameter matrix of the Subbotin graphical model.
//!
//! Entries are stored in *precision form*: the diagonal holds `θ_ii` and the
//! off-diagonal `(i, j)` holds `-θ_ij`, where `θ_ij` is the interaction weight
//! appearing in the node-wise conditional `exp(-(θ_ii x_i - Σ_j θ_ij x_j)^ν)`.
//! In this form normalizability is plain positive definiteness, and at ν = 2
//! the matrix is proportional to the Gaussian precision.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::shape::ShapeParam;

/// Relative tolerance for the positive-definiteness certificate: the smallest
/// eigenvalue must exceed this multiple of the largest diagonal entry.
pub const PD_RELATIVE_THRESHOLD: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamMatrix {
    p: usize,
    values: Vec<f64>,
}

impl ParamMatrix {
    /// Build from a row-major `p × p` matrix in precision form.
    pub fn from_precision_form(p: usize, values: Vec<f64>) -> Result<Self> {
        validate_square(p, &values)?;
        check_symmetric(p, &values)?;
        for i in 0..p {
            let d = values[i * p + i];
            if !(d > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} must be strictly positive, got {d}"
                )));
            }
        }
        Ok(ParamMatrix { p, values })
    }

    /// Build from a row-major matrix holding the interaction weights `θ_ij`
    /// of the conditional density (off-diagonals are negated on storage).
    pub fn from_interaction_form(p: usize, mut values: Vec<f64>) -> Result<Self> {
        validate_square(p, &values)?;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    values[i * p + j] = -values[i * p + j];
                }
            }
        }
        Self::from_precision_form(p, values)
    }

    pub fn identity(p: usize) -> Self {
        let mut values = alloc::vec![0.0; p * p];
        for i in 0..p {
            values[i * p + i] = 1.0;
        }
        ParamMatrix { p, values }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Entry in precision form.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.values[i * self.p + i]
    }

    /// Interaction weight `θ_ij` of the conditional density (sign-flipped
    /// off-diagonal); `θ_ii` on the diagonal.
    #[inline]
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag(i)
        } else {
            -self.get(i, j)
        }
    }

    /// Row-major entries in precision form.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.p, self.p, &self.values)
    }

    /// Off-diagonal support as canonical pairs `(i, j)`, `i < j`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.get(i, j).abs() > tol {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.p).map(|i| self.diag(i)).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self.p, &self.values)
    }

    pub fn is_normalizable(&self) -> bool {
        certify_pd(self.min_eigenvalue(), self.max_diag())
    }
}

fn validate_square(p: usize, values: &[f64]) -> Result<()> {
    if values.len() != p * p {
        return Err(Error::DimensionMismatch { expected: p * p, found: values.len() });
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "entry ({}, {}) is not finite",
            k / p,
            k % p
        )));
    }
    Ok(())
}

fn check_symmetric(p: usize, values: &[f64]) -> Result<()> {
    for i in 0..p {
        for j in (i + 1)..p {
            let a = values[i * p + j];
            let b = values[j * p + i];
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn min_eigenvalue(p: usize, values: &[f64]) -> f64 {
    if p == 0 {
        return f64::INFINITY;
    }
    let m = DMatrix::from_row_slice(p, p, values);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn certify_pd(min_eig: f64, max_diag: f64) -> bool {
    min_eig > PD_RELATIVE_THRESHOLD * max_diag
}

/// Positive-definiteness certificate on a raw row-major matrix. Rejects
/// asymmetric input rather than symmetrizing it.
pub fn check_normalizable_values(p: usize, values: &[f64]) -> Result<bool> {
    validate_square(p, values)?;
    check_symmetric(p, values)?;
    let max_diag = (0..p).map(|i| values[i * p + i]).fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) {
        return Ok(false);
    }
    Ok(certify_pd(min_eigenvalue(p, values), max_diag))
}

/// Whether the joint density built from `theta` has a finite normalizing
/// constant: true iff the precision-form matrix is positive definite.
pub fn check_normalizable(theta: &ParamMatrix) -> bool {
    theta.is_normalizable()
}

/// `(Γ(1/ν)/Γ(3/ν)) Θ`, the inverse covariance implied by `theta`.
pub fn precision_from_theta(theta: &ParamMatrix, nu: ShapeParam) -> Result<DMatrix<f64>> {
    if !theta.is_normalizable() {
        return Err(Error::NotNormalizable);
    }
    let c = 1.0 / nu.standard_variance();
    Ok(theta.to_dmatrix() * c)
}
