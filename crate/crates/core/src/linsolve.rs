//! The `u`-sub-problem: a sparse symmetric positive definite system
//!
//! ```text
//! [lambda (c I + Dx^T Dx + Dy^T Dy) + alpha I] u = r
//! ```
//!
//! with `c = 1` when the `l1` data term is split off (1-norm and mixed-norm
//! models) and `c = 0` for the isotropic and anisotropic baselines.

use alloc::vec;
use alloc::vec::Vec;

use crate::diff::{Axis, DiffOperator};
use crate::error::{Error, Result};
use crate::vecops::{dot, norm2};

/// Largest `m * n` for which [`LinearSolver::Auto`] factors the system.
pub const DIRECT_SOLVE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct USystem {
    pub height: usize,
    pub width: usize,
    pub lambda: f64,
    pub alpha: f64,
    /// Whether `lambda * I` is part of the system.
    pub identity_term: bool,
}

impl USystem {
    pub fn new(height: usize, width: usize, lambda: f64, alpha: f64) -> Result<Self> {
        USystem {
            height,
            width,
            lambda,
            alpha,
            identity_term: true,
        }
        .checked()
    }

    /// System without the `lambda * I` term; needs `alpha > 0`.
    pub fn gradient_only(height: usize, width: usize, lambda: f64, alpha: f64) -> Result<Self> {
        USystem {
            height,
            width,
            lambda,
            alpha,
            identity_term: false,
        }
        .checked()
    }

    fn checked(self) -> Result<Self> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::param("system dimensions must be positive"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param("lambda must be positive"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha must be nonnegative"));
        }
        if !self.identity_term && self.alpha == 0.0 {
            return Err(Error::param("system without identity term needs alpha > 0"));
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficient of the identity in the system matrix.
    fn diagonal_shift(&self) -> f64 {
        if self.identity_term {
            self.lambda + self.alpha
        } else {
            self.alpha
        }
    }

    /// `out = A u`, with `scratch` at least `len()` long.
    fn apply_into(&self, u: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let (m, n) = (self.height, self.width);
        let shift = self.diagonal_shift();
        let dx = DiffOperator::new(m, n, Axis::X);
        let dy = DiffOperator::new(m, n, Axis::Y);
        // lengths are checked by the callers
        dx.apply_into(u, scratch).expect("length checked");
        dx.apply_transpose_into(scratch, out).expect("length checked");
        dy.apply_into(u, scratch).expect("length checked");
        for j in 0..n {
            for i in 0..m {
                let k = i + j * m;
                // (Dy^T w)_k inline, reusing `scratch` as w
                let dyt = if i >= 1 { scratch[k - 1] } else { 0.0 } - if i + 1 < m { scratch[k] } else { 0.0 };
                out[k] = self.lambda * (out[k] + dyt) + shift * u[k];
            }
        }
    }
}

/// `A u`, computed matrix-free.
pub fn apply_system(sys: &USystem, u: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(sys.len(), u.len())?;
    let mut out = vec![0.0; sys.len()];
    let mut scratch = vec![0.0; sys.len()];
    sys.apply_into(u, &mut out, &mut scratch);
    Ok(out)
}

fn relative_residual(sys: &USystem, u: &[f64], r: &[f64], r_norm: f64) -> f64 {
    let mut au = vec![0.0; sys.len()];
    let mut scratch = vec![0.0; sys.len()];
    sys.apply_into(u, &mut au, &mut scratch);
    let res: f64 = au.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
    libm::sqrt(res) / r_norm.max(f64::MIN_POSITIVE)
}

/// Solves `A u = r` by conjugate gradients.
///
/// Succeeds once `|A u - r|_2 / |r|_2 <= tol`; otherwise reports
/// [`Error::NotConverged`] with the final relative residual.
pub fn solve_u(
    sys: &USystem,
    r: &[f64],
    tol: f64,
    max_iter: usize,
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    Error::check_len(sys.len(), r.len())?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("solver tolerance must be positive"));
    }
    let n = sys.len();
    let r_norm = norm2(r);
    if r_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut u = match warm_start {
        Some(w) => {
            Error::check_len(n, w.len())?;
            w.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut res = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let target = tol * r_norm;
    let mut iterations = 0;

    // Outer restarts guard against the recursive residual drifting away from
    // the true one.
    loop {
        sys.apply_into(&u, &mut ap, &mut scratch);
        for k in 0..n {
            res[k] = r[k] - ap[k];
        }
        let mut rs = dot(&res, &res);
        if libm::sqrt(rs) <= target {
            return Ok(u);
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: libm::sqrt(rs) / r_norm,
            });
        }
        p.copy_from_slice(&res);
        while iterations < max_iter {
            iterations += 1;
            sys.apply_into(&p, &mut ap, &mut scratch);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                break;
            }
            let step = rs / pap;
            for k in 0..n {
                u[k] += step * p[k];
                res[k] -= step * ap[k];
            }
            let rs_next = dot(&res, &res);
            if libm::sqrt(rs_next) <= target {
                break;
            }
            let beta = rs_next / rs;
            for k in 0..n {
                p[k] = res[k] + beta * p[k];
            }
            rs = rs_next;
        }
        if relative_residual(sys, &u, r, r_norm) <= tol {
            return Ok(u);
        }
    }
}

/// Which method [`USolver`] uses for the `u`-system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LinearSolver {
    /// Banded Cholesky up to [`DIRECT_SOLVE_LIMIT`] unknowns, CG above.
    #[default]
    Auto,
    ConjugateGradient,
    BandedCholesky,
}

/// Cholesky factor of the system matrix in lower band storage.
///
/// In column-major order the only couplings are between `k` and `k +- 1`
/// (vertical neighbours) and `k +- m` (horizontal neighbours), so the
/// factor has bandwidth `m` and costs `O(m n m^2)` to build.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    len: usize,
    band: usize,
    /// `rows[k * (band + 1) + d]` holds `L[k][k - d]`.
    rows: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(sys: &USystem) -> Result<Self> {
        let (m, n) = (sys.height, sys.width);
        let len = m * n;
        let band = if n > 1 { m } else { usize::from(m > 1) };
        let w = band + 1;
        let mut rows = vec![0.0; len * w];
        // Assemble the lower band of A.
        let shift = sys.diagonal_shift();
        for j in 0..n {
            for i in 0..m {
                let k = i + j * m;
                let deg_x = (j >= 1) as usize + (j + 1 < n) as usize;
                let deg_y = (i >= 1) as usize + (i + 1 < m) as usize;
                rows[k * w] = sys.lambda * (deg_x + deg_y) as f64 + shift;
                if i >= 1 {
                    rows[k * w + 1] = -sys.lambda;
                }
                if j >= 1 {
                    rows[k * w + m] = -sys.lambda;
                }
            }
        }
        // In-place banded Cholesky.
        for k in 0..len {
            let lo = k.saturating_sub(band);
            for c in lo..k {
                let mut s = rows[k * w + (k - c)];
                for t in lo..c {
                    s -= rows[k * w + (k - t)] * rows[c * w + (c - t)];
                }
                rows[k * w + (k - c)] = s / rows[c * w];
            }
            let mut d = rows[k * w];
            for t in lo..k {
                let v = rows[k * w + (k - t)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(Error::param("system matrix is not positive definite"));
            }
            rows[k * w] = libm::sqrt(d);
        }
        Ok(BandedCholesky { len, band, rows })
    }

    pub fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.len, r.len())?;
        let w = self.band + 1;
        let mut x = r.to_vec();
        for k in 0..self.len {
            let mut s = x[k];
            for t in k.saturating_sub(self.band)..k {
                s -= self.rows[k * w + (k - t)] * x[t];
            }
            x[k] = s / self.rows[k * w];
        }
        for k in (0..self.len).rev() {
            let mut s = x[k];
            for t in k + 1..(k + self.band + 1).min(self.len) {
                s -= self.rows[t * w + (t - k)] * x[t];
            }
            x[k] = s / self.rows[k * w];
        }
        Ok(x)
    }
}

/// A `u`-system prepared for repeated solves with different right-hand sides.
#[derive(Debug, Clone)]
pub struct USolver {
    sys: USystem,
    tol: f64,
    max_iter: usize,
    factor: Option<BandedCholesky>,
}

impl USolver {
    pub fn new(sys: USystem, method: LinearSolver, tol: f64, max_iter: usize) -> Result<Self> {
        let direct = match method {
            LinearSolver::Auto => sys.len() <= DIRECT_SOLVE_LIMIT,
            LinearSolver::ConjugateGradient => false,
            LinearSolver::BandedCholesky => true,
        };
        let factor = if direct {
            Some(BandedCholesky::factor(&sys)?)
        } else {
            None
        };
        Ok(USolver {
            sys,
            tol,
            max_iter,
            factor,
        })
    }

    pub fn system(&self) -> &USystem {
        &self.sys
    }

    /// Solves `A u = r`; the direct path falls back to CG refinement from its
    /// own solution whenever it misses the residual tolerance.
    pub fn solve(&self, r: &[f64], warm_start: Option<&[f64]>) -> Result<Vec<f64>> {
        match &self.factor {
            Some(chol) => {
                let u = chol.solve(r)?;
                let r_norm = norm2(r);
                if r_norm == 0.0 || relative_residual(&self.sys, &u, r, r_norm) <= self.tol {
                    Ok(u)
                } else {
                    solve_u(&self.sys, r, self.tol, self.max_iter, Some(&u))
                }
            }
            None => solve_u(&self.sys, r, self.tol, self.max_iter, warm_start),
        }
    }
}
