//! Matrix-free forward-difference operators.
//!
//! With `G_k` the `k x k` forward-difference matrix whose last row is zero,
//! the horizontal operator is `Dx = G_n (x) I_m` and the vertical one is
//! `Dy = I_n (x) G_m`, both acting on column-major vectors of length `m * n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Differences along a row, between neighbouring columns.
    X,
    /// Differences along a column, between neighbouring rows.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffOperator {
    pub height: usize,
    pub width: usize,
    pub axis: Axis,
}

impl DiffOperator {
    pub fn new(height: usize, width: usize, axis: Axis) -> Self {
        DiffOperator {
            height,
            width,
            axis,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.apply_transpose_into(v, &mut out)?;
        Ok(out)
    }

    /// `out = D u`.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let (m, n) = (self.height, self.width);
        Error::check_len(m * n, u.len())?;
        Error::check_len(m * n, out.len())?;
        match self.axis {
            Axis::X => {
                for j in 0..n {
                    let col = j * m;
                    if j + 1 < n {
                        for i in 0..m {
                            out[col + i] = u[col + m + i] - u[col + i];
                        }
                    } else {
                        out[col..col + m].fill(0.0);
                    }
                }
            }
            Axis::Y => {
                for j in 0..n {
                    let col = j * m;
                    for i in 0..m - 1 {
                        out[col + i] = u[col + i + 1] - u[col + i];
                    }
                    out[col + m - 1] = 0.0;
                }
            }
        }
        Ok(())
    }

    /// `out = D^T v`.
    pub fn apply_transpose_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let (m, n) = (self.height, self.width);
        Error::check_len(m * n, v.len())?;
        Error::check_len(m * n, out.len())?;
        // (G^T w)_k = w_{k-1} [k >= 1] - w_k [k <= len - 2]
        match self.axis {
            Axis::X => {
                for j in 0..n {
                    let col = j * m;
                    for i in 0..m {
                        let mut acc = 0.0;
                        if j >= 1 {
                            acc += v[col - m + i];
                        }
                        if j + 1 < n {
                            acc -= v[col + i];
                        }
                        out[col + i] = acc;
                    }
                }
            }
            Axis::Y => {
                for j in 0..n {
                    let col = j * m;
                    for i in 0..m {
                        let mut acc = 0.0;
                        if i >= 1 {
                            acc += v[col + i - 1];
                        }
                        if i + 1 < m {
                            acc -= v[col + i];
                        }
                        out[col + i] = acc;
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn apply_diff(op: &DiffOperator, u: &[f64]) -> Result<Vec<f64>> {
    op.apply(u)
}

pub fn apply_diff_transpose(op: &DiffOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.apply_transpose(v)
}
