//! Total-variation image denoising.
//!
//! The crate implements a mixed-norm TV model, which pairs anisotropic total
//! variation with both an `l1` and a squared `l2` data term,
//!
//! ```text
//! argmin_u  |Dx u|_1 + |Dy u|_1 + mu |u - f|_1 + alpha |u - f|_2^2
//! ```
//!
//! solved by split Bregman iteration, together with the classic 1-norm,
//! isotropic and anisotropic TV baselines, seeded noise synthesis, and the
//! MSE / PSNR / SSIM / PPS similarity measures.
//!
//! Images are stored column-major (`pixel(i, j) == data[i + j * m]`) in
//! double precision on a nominal `[0, 255]` scale. The crate is `no_std`
//! and only needs `alloc`; file formats and the command-line tool live in
//! the `mixtv` crate.
#![no_std]

extern crate alloc;

pub mod bregman;
pub mod diff;
mod error;
pub mod image;
pub mod linsolve;
pub mod metrics;
pub mod model;
pub mod noise;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod prox;
pub(crate) mod vecops;

pub use bregman::{denoise, denoise_pipeline, Denoised, IterationDiag, SolverConfig, StopReason};
pub use diff::{apply_diff, apply_diff_transpose, Axis, DiffOperator};
pub use error::{Error, Result};
pub use image::{unvectorize, vectorize, Image};
pub use linsolve::{apply_system, solve_u, LinearSolver, USystem};
pub use metrics::{mse, pps, psnr, ssim, SsimConstants};
pub use model::{objective_value, ModelKind, ModelSpec};
pub use noise::{add_noise, add_noise_chain, NoiseKind, NoiseSpec};
pub use prox::{cut, shrink1, shrink2_paired};
