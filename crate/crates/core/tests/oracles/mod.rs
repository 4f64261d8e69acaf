//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerical code: quadrature,
//! eigenvalues, the coordinate-descent lasso and the brute-force minimizer are
//! all written from scratch so a shared bug cannot hide on both sides.

#![allow(dead_code)]

use subbotin_core::estimator::CombinationRule;
use subbotin_core::{Dataset, Graph};

/// Adaptive Simpson quadrature on `[a, b]`, started from 64 panels so narrow
/// peaks are not missed by the first coarse estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 64;
    let w = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let lo = a + k as f64 * w;
            let hi = lo + w;
            let m = 0.5 * (lo + hi);
            let (fa, fm, fb) = (f(lo), f(m), f(hi));
            let whole = w / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Nested adaptive quadrature over the square `[-r, r]²`.
pub fn integrate_square<F: Fn(f64, f64) -> f64>(f: &F, r: f64, tol: f64) -> f64 {
    let inner = |x: f64| integrate(&|y: f64| f(x, y), -r, r, tol / (4.0 * r));
    integrate(&inner, -r, r, tol)
}

/// Eigenvalues of a symmetric row-major matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(p: usize, values: &[f64]) -> Vec<f64> {
    let mut a = values.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    off += a[i * p + j] * a[i * p + j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for k in 0..p {
            for l in (k + 1)..p {
                let akl = a[k * p + l];
                if akl.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[l * p + l] - a[k * p + k]) / (2.0 * akl);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..p {
                    let ark = a[r * p + k];
                    let arl = a[r * p + l];
                    a[r * p + k] = c * ark - s * arl;
                    a[r * p + l] = s * ark + c * arl;
                }
                for r in 0..p {
                    let akr = a[k * p + r];
                    let alr = a[l * p + r];
                    a[k * p + r] = c * akr - s * alr;
                    a[l * p + r] = s * akr + c * alr;
                }
            }
        }
    }
    (0..p).map(|i| a[i * p + i]).collect()
}

/// Gauss–Jordan inverse with partial pivoting (row-major).
pub fn invert(p: usize, values: &[f64]) -> Vec<f64> {
    let mut a = values.to_vec();
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        inv[i * p + i] = 1.0;
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&x, &y| a[x * p + col].abs().total_cmp(&a[y * p + col].abs())).unwrap();
        for k in 0..p {
            a.swap(col * p + k, pivot * p + k);
            inv.swap(col * p + k, pivot * p + k);
        }
        let d = a[col * p + col];
        for k in 0..p {
            a[col * p + k] /= d;
            inv[col * p + k] /= d;
        }
        for r in 0..p {
            if r != col {
                let f = a[r * p + col];
                for k in 0..p {
                    a[r * p + k] -= f * a[col * p + k];
                    inv[r * p + k] -= f * inv[col * p + k];
                }
            }
        }
    }
    inv
}

/// Textbook cyclic coordinate descent for `(1/2N)‖y − Xβ‖² + λ‖β‖₁`.
pub fn cd_lasso(columns: &[&[f64]], y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len() as f64;
    let k = columns.len();
    let mut beta = vec![0.0; k];
    let mut r = y.to_vec();
    let norms: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / n).collect();
    for _ in 0..100_000 {
        let mut delta = 0.0f64;
        for j in 0..k {
            let c = columns[j];
            let rho = c.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n + norms[j] * beta[j];
            let z = if rho > lambda {
                (rho - lambda) / norms[j]
            } else if rho < -lambda {
                (rho + lambda) / norms[j]
            } else {
                0.0
            };
            let d = z - beta[j];
            if d != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c.iter()) {
                    *ri -= d * ci;
                }
                beta[j] = z;
                delta = delta.max(d.abs());
            }
        }
        if delta < 1e-13 {
            break;
        }
    }
    beta
}

/// Neighborhood-selection graph from coordinate-descent fits on every node.
pub fn cd_graph(data: &Dataset, lambda: f64, rule: CombinationRule, zero_tol: f64) -> Graph {
    let p = data.p();
    let mut selected = vec![false; p * p];
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
        let cols: Vec<&[f64]> = others.iter().map(|&j| data.column(j)).collect();
        let beta = cd_lasso(&cols, data.column(i), lambda);
        for (slot, &j) in others.iter().enumerate() {
            selected[i * p + j] = beta[slot].abs() > zero_tol;
        }
    }
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let (a, b) = (selected[i * p + j], selected[j * p + i]);
            let keep = match rule {
                CombinationRule::And => a && b,
                CombinationRule::Or => a || b,
            };
            if keep {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(p, edges).unwrap()
}

/// Grid search over `[-r, r]²` at resolution `h`, then repeated local grids
/// shrinking by a factor of 10 around the incumbent.
pub fn brute_force_min_2d<F: Fn(f64, f64) -> f64>(f: &F, r: f64, h: f64) -> (f64, f64, f64) {
    let steps = (2.0 * r / h).round() as i64;
    let mut best = (0.0, 0.0, f(0.0, 0.0));
    for a in 0..=steps {
        let x = -r + a as f64 * h;
        for b in 0..=steps {
            let y = -r + b as f64 * h;
            let v = f(x, y);
            if v < best.2 {
                best = (x, y, v);
            }
        }
    }
    let mut width = h;
    for _ in 0..8 {
        let (cx, cy, _) = best;
        let fine = width / 10.0;
        for a in -20..=20 {
            for b in -20..=20 {
                let x = cx + a as f64 * fine;
                let y = cy + b as f64 * fine;
                let v = f(x, y);
                if v < best.2 {
                    best = (x, y, v);
                }
            }
        }
        width = fine;
    }
    best
}

/// Central finite-difference gradient with step `h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = xp[j];
            xp[j] = orig + h;
            let up = f(&xp);
            xp[j] = orig - h;
            let down = f(&xp);
            xp[j] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Small deterministic generator (splitmix64) so oracle inputs do not depend
/// on the library's RNG plumbing.
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Standardized `n × p` dataset of i.i.d. normals.
pub fn normal_dataset(rng: &mut Mix, n: usize, p: usize) -> Dataset {
    let values: Vec<f64> = (0..n * p).map(|_| rng.normal()).collect();
    Dataset::from_columns(n, p, values).unwrap().standardize().unwrap()
}

/// `max_ij |a_ij − b_ij| / max(1, max_ij |b_ij|)`.
pub fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
