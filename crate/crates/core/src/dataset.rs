use alloc::format;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};

/// An `n × p` matrix of observations, stored column-major so that node-wise
/// regressions can borrow response and predictor columns without copying.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
    standardized: bool,
    column_means: Option<Vec<f64>>,
    column_sds: Option<Vec<f64>>,
}

impl Dataset {
    /// `values` holds column `j` at `values[j * n .. (j + 1) * n]`.
    pub fn from_columns(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                k % n.max(1),
                k / n.max(1)
            )));
        }
        Ok(Dataset { n, p, values, standardized: false, column_means: None, column_sds: None })
    }

    /// Build from row-major data.
    pub fn from_row_major(n: usize, p: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: rows.len() });
        }
        let mut values = alloc::vec![0.0; n * p];
        for r in 0..n {
            for c in 0..p {
                values[c * n + r] = rows[r * p + c];
            }
        }
        Self::from_columns(n, p, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n + row]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.p).map(|c| self.get(r, c)).collect()
    }

    pub fn columns_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Means removed by [`standardize`], if any.
    pub fn column_means(&self) -> Option<&[f64]> {
        self.column_means.as_deref()
    }

    pub fn column_sds(&self) -> Option<&[f64]> {
        self.column_sds.as_deref()
    }

    /// Rows gathered by index (repeats allowed); the result is unstandardized.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let m = rows.len();
        let mut values = Vec::with_capacity(m * self.p);
        for c in 0..self.p {
            let col = self.column(c);
            values.extend(rows.iter().map(|&r| col[r]));
        }
        Dataset {
            n: m,
            p: self.p,
            values,
            standardized: false,
            column_means: None,
            column_sds: None,
        }
    }

    /// Columns permuted: output column `k` is input column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Dataset> {
        if perm.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: perm.len() });
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &c in perm {
            values.extend_from_slice(self.column(c));
        }
        let mut out = self.clone();
        out.values = values;
        out.column_means = self.column_means.as_ref().map(|m| perm.iter().map(|&c| m[c]).collect());
        out.column_sds = self.column_sds.as_ref().map(|s| perm.iter().map(|&c| s[c]).collect());
        Ok(out)
    }

    /// Center and scale each column to unit sample standard deviation
    /// (divisor `n - 1`).
    pub fn standardize(&self) -> Result<Dataset> {
        if self.n < 2 {
            return Err(Error::Precondition(format!(
                "standardization needs at least 2 rows, got {}",
                self.n
            )));
        }
        let n = self.n as f64;
        let mut values = Vec::with_capacity(self.values.len());
        let mut means = Vec::with_capacity(self.p);
        let mut sds = Vec::with_capacity(self.p);
        for c in 0..self.p {
            let col = self.column(c);
            let mean = col.iter().sum::<f64>() / n;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = sqrt(ss / (n - 1.0));
            if !(sd > 1e-12 * mean.abs().max(1.0)) {
                return Err(Error::DegenerateColumn { column: c });
            }
            values.extend(col.iter().map(|v| (v - mean) / sd));
            means.push(mean);
            sds.push(sd);
        }
        Ok(Dataset {
            n: self.n,
            p: self.p,
            values,
            standardized: true,
            column_means: Some(means),
            column_sds: Some(sds),
        })
    }
}

/// Free-function form of [`Dataset::standardize`].
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    data.standardize()
}
