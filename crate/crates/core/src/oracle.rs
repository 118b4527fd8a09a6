//! Independent reference computations for cross-checking the solvers.
//!
//! Nothing here shares code with the split Bregman solver except
//! [`objective_value`]: the minimizer is plain subgradient descent, and the
//! operators are rebuilt as dense Kronecker products. Everything is sized
//! for tiny problems only.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{objective_value, ModelSpec};

/// Largest `m * n` the subgradient oracle accepts.
pub const MAX_ORACLE_PIXELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Initial step; step `k` is `step0 / sqrt(k + 1)`.
    pub step0: f64,
    pub iterations: usize,
    /// Stop early once the subgradient norm falls to this value.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            step0: 1.0,
            iterations: 200_000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    /// Best iterate found.
    pub u: Vec<f64>,
    pub objective: f64,
    /// Best objective so far, sampled roughly 100 times over the run.
    pub best_trace: Vec<f64>,
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One subgradient of the model objective at `u` (with `sign(0) = 0`).
fn subgradient(u: &[f64], f: &[f64], m: usize, n: usize, model: &ModelSpec, g: &mut [f64]) {
    for (k, gk) in g.iter_mut().enumerate() {
        let r = u[k] - f[k];
        *gk = model.mu * sign(r) + 2.0 * model.alpha * r;
    }
    let iso = model.kind.is_isotropic();
    for j in 0..n {
        for i in 0..m {
            let k = i + j * m;
            let dx = if j + 1 < n { u[k + m] - u[k] } else { 0.0 };
            let dy = if i + 1 < m { u[k + 1] - u[k] } else { 0.0 };
            let (wx, wy) = if iso {
                let s = libm::sqrt(dx * dx + dy * dy);
                if s > 0.0 {
                    (dx / s, dy / s)
                } else {
                    (0.0, 0.0)
                }
            } else {
                (sign(dx), sign(dy))
            };
            if j + 1 < n {
                g[k + m] += wx;
                g[k] -= wx;
            }
            if i + 1 < m {
                g[k + 1] += wy;
                g[k] -= wy;
            }
        }
    }
}

/// Minimizes the model objective by subgradient descent with diminishing
/// steps, starting from `f` and keeping the best iterate.
pub fn oracle_minimize(
    f: &[f64],
    height: usize,
    width: usize,
    model: &ModelSpec,
    cfg: &OracleConfig,
) -> Result<OracleRun> {
    let len = height * width;
    Error::check_len(len, f.len())?;
    if len > MAX_ORACLE_PIXELS {
        return Err(Error::param("oracle is limited to 256 pixels"));
    }
    if !(cfg.step0 > 0.0) {
        return Err(Error::param("oracle step must be positive"));
    }
    let mut u = f.to_vec();
    let mut g = vec![0.0; len];
    let mut best = objective_value(&u, f, height, width, model)?;
    let mut best_u = u.clone();
    let sample = (cfg.iterations / 100).max(1);
    let mut best_trace = vec![best];
    for k in 0..cfg.iterations {
        subgradient(&u, f, height, width, model, &mut g);
        let gnorm = libm::sqrt(g.iter().map(|x| x * x).sum::<f64>());
        if gnorm <= cfg.tolerance {
            break;
        }
        let step = cfg.step0 / libm::sqrt((k + 1) as f64);
        for (x, d) in u.iter_mut().zip(&g) {
            *x -= step * d;
        }
        let obj = objective_value(&u, f, height, width, model)?;
        if obj < best {
            best = obj;
            best_u.copy_from_slice(&u);
        }
        if (k + 1) % sample == 0 {
            best_trace.push(best);
        }
    }
    Ok(OracleRun {
        u: best_u,
        objective: best,
        best_trace,
    })
}

/// Minimizer of `gamma |u| + (u - v)^2 / 2` over a grid of spacing `step`.
pub fn scan_shrink1(v: f64, gamma: f64, step: f64) -> f64 {
    let lo = v.min(0.0) - 1.0;
    let hi = v.max(0.0) + 1.0;
    let count = libm::ceil((hi - lo) / step) as usize;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=count {
        let u = lo + k as f64 * step;
        let val = gamma * u.abs() + 0.5 * (u - v) * (u - v);
        if val < best.0 {
            best = (val, u);
        }
    }
    best.1
}

/// Minimizer of `gamma sqrt(a^2 + b^2) + ((a - x)^2 + (b - y)^2) / 2` over a
/// grid of spacing `step` covering the box spanned by the origin and `(x, y)`.
pub fn scan_shrink2(x: f64, y: f64, gamma: f64, step: f64) -> (f64, f64) {
    let axis = |c: f64| {
        let lo = c.min(0.0) - 2.0 * step;
        let count = libm::ceil((c.max(0.0) + 2.0 * step - lo) / step) as usize;
        (lo, count)
    };
    let (xlo, xn) = axis(x);
    let (ylo, yn) = axis(y);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=xn {
        let a = xlo + i as f64 * step;
        for j in 0..=yn {
            let b = ylo + j as f64 * step;
            let val = gamma * libm::sqrt(a * a + b * b) + 0.5 * ((a - x) * (a - x) + (b - y) * (b - y));
            if val < best.0 {
                best = (val, a, b);
            }
        }
    }
    (best.1, best.2)
}

pub mod dense {
    //! Dense reference constructions of the operators, for small sizes.
    use alloc::vec;
    use alloc::vec::Vec;

    use crate::diff::Axis;
    use crate::linsolve::USystem;

    pub type Matrix = Vec<Vec<f64>>;

    pub fn forward_difference(k: usize) -> Matrix {
        let mut g = vec![vec![0.0; k]; k];
        for (r, row) in g.iter_mut().enumerate().take(k.saturating_sub(1)) {
            row[r] = -1.0;
            row[r + 1] = 1.0;
        }
        g
    }

    pub fn identity(k: usize) -> Matrix {
        let mut a = vec![vec![0.0; k]; k];
        for (r, row) in a.iter_mut().enumerate() {
            row[r] = 1.0;
        }
        a
    }

    pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
        let (ar, ac) = (a.len(), a[0].len());
        let (br, bc) = (b.len(), b[0].len());
        let mut out = vec![vec![0.0; ac * bc]; ar * br];
        for i in 0..ar {
            for j in 0..ac {
                for k in 0..br {
                    for l in 0..bc {
                        out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn diff_matrix(m: usize, n: usize, axis: Axis) -> Matrix {
        match axis {
            Axis::X => kron(&forward_difference(n), &identity(m)),
            Axis::Y => kron(&identity(n), &forward_difference(m)),
        }
    }

    pub fn transpose(a: &Matrix) -> Matrix {
        let mut t = vec![vec![0.0; a.len()]; a[0].len()];
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        t
    }

    pub fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
        let bt = transpose(b);
        a.iter()
            .map(|row| bt.iter().map(|col| row.iter().zip(col).map(|(p, q)| p * q).sum()).collect())
            .collect()
    }

    /// Dense `lambda (c I + Dx^T Dx + Dy^T Dy) + alpha I`.
    pub fn system_matrix(sys: &USystem) -> Matrix {
        let (m, n) = (sys.height, sys.width);
        let dx = diff_matrix(m, n, Axis::X);
        let dy = diff_matrix(m, n, Axis::Y);
        let xx = matmul(&transpose(&dx), &dx);
        let yy = matmul(&transpose(&dy), &dy);
        let c = if sys.identity_term { 1.0 } else { 0.0 };
        let mut a = vec![vec![0.0; m * n]; m * n];
        for i in 0..m * n {
            for j in 0..m * n {
                let id = if i == j { 1.0 } else { 0.0 };
                a[i][j] = sys.lambda * (c * id + xx[i][j] + yy[i][j]) + sys.alpha * id;
            }
        }
        a
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
        let n = a.len();
        let mut a = a.clone();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;

    #[test]
    fn constant_image_is_fixed() {
        let f = [42.0; 9];
        for kind in ModelKind::ALL {
            let run = oracle_minimize(&f, 3, 3, &ModelSpec::default_for(kind), &OracleConfig::default()).unwrap();
            assert_eq!(run.objective, 0.0);
            assert_eq!(run.u, f);
        }
    }

    #[test]
    fn two_pixel_grid_scan() {
        // f = (0, 10) as a 1x2 image, mu = alpha = 1
        let model = ModelSpec::mixed_norm(1.0, 1.0, 1.0);
        let f = [0.0, 10.0];
        let step = 0.01;
        let mut best = f64::INFINITY;
        for i in 0..=1200 {
            for j in 0..=1200 {
                let u = [-1.0 + i as f64 * step, -1.0 + j as f64 * step];
                best = best.min(objective_value(&u, &f, 1, 2, &model).unwrap());
            }
        }
        let run = oracle_minimize(&f, 1, 2, &model, &OracleConfig::default()).unwrap();
        // the objective varies by at most ~0.05 across one grid cell here
        assert!((run.objective - best).abs() <= 0.05, "{} vs {}", run.objective, best);
    }

    #[test]
    fn best_trace_non_increasing() {
        let f: Vec<f64> = (0..16).map(|k| ((k * 37) % 11) as f64 * 20.0).collect();
        let cfg = OracleConfig { iterations: 5000, ..OracleConfig::default() };
        let run = oracle_minimize(&f, 4, 4, &ModelSpec::mixed_norm(0.5, 0.05, 1.0), &cfg).unwrap();
        assert!(run.best_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(run.objective < objective_value(&f, &f, 4, 4, &ModelSpec::mixed_norm(0.5, 0.05, 1.0)).unwrap());
    }

    #[test]
    fn rejects_large_inputs() {
        let f = vec![0.0; 289];
        assert!(oracle_minimize(&f, 17, 17, &ModelSpec::default_for(ModelKind::MixedNorm), &OracleConfig::default()).is_err());
    }
}
