//! Split Bregman iteration for the TV models.
//!
//! The mixed-norm and 1-norm models split all three terms,
//!
//! ```text
//! x = Dx u,  y = Dy u,  d = f - u,
//! ```
//!
//! and alternate a linear solve for `u` with closed-form shrinkage for
//! `d`, `x`, `y`, followed by the Bregman updates. The isotropic and
//! anisotropic baselines only split the gradient (`x`, `y`); their `u`-system
//! drops the `lambda * I` term and the isotropic one shrinks `(x, y)` pairwise.
//!
//! Per outer iteration, with `A = lambda (I + Dx^T Dx + Dy^T Dy) + alpha I`:
//!
//! ```text
//! u  <- A^{-1} [ lambda (f - d + b1 + Dx^T (x - b2) + Dy^T (y - b3)) + alpha f ]
//! d  <- shrink1(f - u + b1, mu / 2 lambda)
//! x  <- shrink1(Dx u + b2, 1 / 2 lambda)
//! y  <- shrink1(Dy u + b3, 1 / 2 lambda)
//! b1 <- b1 + f - u - d,  b2 <- b2 + Dx u - x,  b3 <- b3 + Dy u - y
//! ```
//!
//! The Bregman updates are evaluated in the equivalent form
//! `b <- cut(v, gamma)` on the same argument `v` that was shrunk, which keeps
//! `|b1|_inf <= mu / 2 lambda` and `|b2|_inf, |b3|_inf <= 1 / 2 lambda` exact
//! in floating point.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::diff::{Axis, DiffOperator};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::linsolve::{LinearSolver, USolver, USystem};
use crate::model::{objective_value, ModelSpec};
use crate::prox::{cut_scalar, paired_scale, shrink_scalar};
use crate::vecops::{all_finite, dist2, norm_inf};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    /// Outer stopping tolerance on `|u - u_prev|_2`; `None` means
    /// `1e-3 * sqrt(m n)`.
    pub tolerance: Option<f64>,
    pub max_outer: usize,
    /// Relative residual required of each `u` solve.
    pub inner_tolerance: f64,
    /// CG iteration cap per solve; `None` means `10 m n`.
    pub inner_max_iter: Option<usize>,
    pub linear_solver: LinearSolver,
    pub record_diagnostics: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: None,
            max_outer: 500,
            inner_tolerance: 1e-8,
            inner_max_iter: None,
            linear_solver: LinearSolver::Auto,
            record_diagnostics: false,
        }
    }
}

impl SolverConfig {
    pub fn tolerance_for(&self, pixels: usize) -> f64 {
        self.tolerance
            .unwrap_or_else(|| 1e-3 * libm::sqrt(pixels as f64))
    }

    fn validate(&self) -> Result<()> {
        if let Some(eps) = self.tolerance {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::param("outer tolerance must be positive"));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::param("max_outer must be at least 1"));
        }
        if !(self.inner_tolerance > 0.0 && self.inner_tolerance.is_finite()) {
            return Err(Error::param("inner tolerance must be positive"));
        }
        if self.inner_max_iter == Some(0) {
            return Err(Error::param("inner_max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StopReason {
    /// `|u - u_prev|_2` fell to the tolerance.
    Tolerance,
    /// The outer iteration cap was reached first.
    IterationCap,
}

/// Per-iteration convergence measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiag {
    pub k: usize,
    /// `|u_k - u_{k-1}|_2`
    pub step_norm: f64,
    /// `|d - (f - u)|_2`, zero when the data term is not split.
    pub residual_d: f64,
    /// `|x - Dx u|_2`
    pub residual_x: f64,
    /// `|y - Dy u|_2`
    pub residual_y: f64,
    pub objective: f64,
    pub b1_max: f64,
    pub b2_max: f64,
    pub b3_max: f64,
}

/// Iterates of the split Bregman scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BregmanState {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
    pub k: usize,
}

impl BregmanState {
    /// `u = f`, everything else zero.
    pub fn initial(f: &[f64]) -> Self {
        let zeros = vec![0.0; f.len()];
        BregmanState {
            u: f.to_vec(),
            d: zeros.clone(),
            x: zeros.clone(),
            y: zeros.clone(),
            b1: zeros.clone(),
            b2: zeros.clone(),
            b3: zeros,
            k: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Denoised {
    pub image: Image,
    pub diagnostics: Vec<IterationDiag>,
    pub stop: StopReason,
    pub iterations: usize,
    pub state: BregmanState,
}

/// Denoises `f` with the given model.
///
/// The result is not clamped to `[0, 255]`.
pub fn denoise(f: &Image, model: &ModelSpec, config: &SolverConfig) -> Result<Denoised> {
    model.validate()?;
    run_split_bregman(f, model, config, model.kind.splits_fidelity())
}

/// Runs the split Bregman machinery with an explicit choice of whether the
/// `l1` data term gets its own variable `d`.
///
/// Only signs and finiteness of the weights are checked, so this also runs
/// e.g. the fidelity-split scheme with `mu = 0`, where `d` tracks `f - u`
/// and `b1` stays zero.
pub fn run_split_bregman(
    f: &Image,
    model: &ModelSpec,
    config: &SolverConfig,
    split_fidelity: bool,
) -> Result<Denoised> {
    model.validate_weights()?;
    config.validate()?;
    if !split_fidelity && model.alpha == 0.0 {
        return Err(Error::param("alpha must be positive without the fidelity split"));
    }
    let (m, n) = (f.height(), f.width());
    let len = m * n;
    let fv = f.pixels();
    let lambda = model.lambda;
    let alpha = model.alpha;

    let sys = if split_fidelity {
        USystem::new(m, n, lambda, alpha)?
    } else {
        USystem::gradient_only(m, n, lambda, alpha)?
    };
    let inner_max = config.inner_max_iter.unwrap_or(10 * len);
    let solver = USolver::new(sys, config.linear_solver, config.inner_tolerance, inner_max)?;
    let dx = DiffOperator::new(m, n, Axis::X);
    let dy = DiffOperator::new(m, n, Axis::Y);

    let gamma_d = model.mu / (2.0 * lambda);
    let gamma_xy = 1.0 / (2.0 * lambda);
    let eps = config.tolerance_for(len);
    let isotropic = model.kind.is_isotropic();

    let mut st = BregmanState::initial(fv);
    let mut rhs = vec![0.0; len];
    let mut tmp = vec![0.0; len];
    let mut acc = vec![0.0; len];
    let mut dxu = vec![0.0; len];
    let mut dyu = vec![0.0; len];
    let mut diagnostics = Vec::new();
    let mut stop = StopReason::IterationCap;

    while st.k < config.max_outer {
        st.k += 1;
        let k = st.k;

        // rhs = lambda (f - d + b1 + Dx^T (x - b2) + Dy^T (y - b3)) + alpha f
        for i in 0..len {
            tmp[i] = st.x[i] - st.b2[i];
        }
        dx.apply_transpose_into(&tmp, &mut acc)?;
        for i in 0..len {
            tmp[i] = st.y[i] - st.b3[i];
        }
        dy.apply_transpose_into(&tmp, &mut rhs)?;
        for i in 0..len {
            let mut inner = acc[i] + rhs[i];
            if split_fidelity {
                inner += fv[i] - st.d[i] + st.b1[i];
            }
            rhs[i] = lambda * inner + alpha * fv[i];
        }

        let u = solver.solve(&rhs, Some(&st.u)).map_err(|e| Error::Inner {
            iteration: k,
            source: Box::new(e),
        })?;
        if !all_finite(&u) {
            return Err(Error::NonFinite { iteration: k });
        }
        let step_norm = dist2(&u, &st.u);
        st.u = u;

        if split_fidelity {
            for i in 0..len {
                let v = fv[i] - st.u[i] + st.b1[i];
                st.d[i] = shrink_scalar(v, gamma_d);
                st.b1[i] = cut_scalar(v, gamma_d);
            }
        }
        dx.apply_into(&st.u, &mut dxu)?;
        dy.apply_into(&st.u, &mut dyu)?;
        for i in 0..len {
            let vx = dxu[i] + st.b2[i];
            let vy = dyu[i] + st.b3[i];
            if isotropic {
                let t = paired_scale(vx, vy, gamma_xy);
                st.x[i] = vx * t;
                st.y[i] = vy * t;
                st.b2[i] = vx - st.x[i];
                st.b3[i] = vy - st.y[i];
            } else {
                st.x[i] = shrink_scalar(vx, gamma_xy);
                st.y[i] = shrink_scalar(vy, gamma_xy);
                st.b2[i] = cut_scalar(vx, gamma_xy);
                st.b3[i] = cut_scalar(vy, gamma_xy);
            }
        }

        if !step_norm.is_finite() || !all_finite(&st.b2) || !all_finite(&st.b3) {
            return Err(Error::NonFinite { iteration: k });
        }

        if config.record_diagnostics {
            let residual_d = if split_fidelity {
                libm::sqrt(
                    (0..len)
                        .map(|i| {
                            let r = st.d[i] - (fv[i] - st.u[i]);
                            r * r
                        })
                        .sum(),
                )
            } else {
                0.0
            };
            diagnostics.push(IterationDiag {
                k,
                step_norm,
                residual_d,
                residual_x: dist2(&st.x, &dxu),
                residual_y: dist2(&st.y, &dyu),
                objective: objective_value(&st.u, fv, m, n, model)?,
                b1_max: norm_inf(&st.b1),
                b2_max: norm_inf(&st.b2),
                b3_max: norm_inf(&st.b3),
            });
        }

        if step_norm <= eps {
            stop = StopReason::Tolerance;
            break;
        }
    }

    let image = Image::new(m, n, st.u.clone())?;
    Ok(Denoised {
        image,
        diagnostics,
        stop,
        iterations: st.k,
        state: st,
    })
}

/// Runs the stages in order, each denoising the previous stage's output.
pub fn denoise_pipeline(f: &Image, stages: &[(ModelSpec, SolverConfig)]) -> Result<Image> {
    if stages.is_empty() {
        return Err(Error::param("pipeline needs at least one stage"));
    }
    let mut current = f.clone();
    for (model, config) in stages {
        current = denoise(&current, model, config)?.image;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;
    use crate::oracle::{oracle_minimize, OracleConfig};

    fn random_image(m: usize, n: usize, seed: u64) -> Image {
        let mut s = seed;
        let px = (0..m * n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 255.0
            })
            .collect();
        Image::new(m, n, px).unwrap()
    }

    fn tight(max_outer: usize) -> SolverConfig {
        SolverConfig {
            tolerance: Some(1e-10),
            max_outer,
            inner_tolerance: 1e-12,
            record_diagnostics: true,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let f = Image::filled(6, 5, 100.0).unwrap();
        for kind in ModelKind::ALL {
            for solver in [LinearSolver::ConjugateGradient, LinearSolver::BandedCholesky] {
                let cfg = SolverConfig {
                    linear_solver: solver,
                    ..SolverConfig::default()
                };
                let out = denoise(&f, &ModelSpec::default_for(kind), &cfg).unwrap();
                assert_eq!(out.stop, StopReason::Tolerance);
                assert_eq!(out.iterations, 1);
                assert!(out.image.pixels().iter().all(|p| (p - 100.0).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn single_pixel_returns_input() {
        let f = Image::filled(1, 1, 73.5).unwrap();
        let out = denoise(&f, &ModelSpec::mixed_norm(0.5, 0.05, 1.0), &tight(100)).unwrap();
        assert!((out.image.get(0, 0) - 73.5).abs() < 1e-9);
    }

    #[test]
    fn bregman_bounds_hold_every_iteration() {
        let f = random_image(8, 8, 5);
        let model = ModelSpec::mixed_norm(0.5, 0.05, 1.0);
        let out = denoise(&f, &model, &tight(300)).unwrap();
        for d in &out.diagnostics {
            assert!(d.b1_max <= model.mu / (2.0 * model.lambda));
            assert!(d.b2_max <= 1.0 / (2.0 * model.lambda));
            assert!(d.b3_max <= 1.0 / (2.0 * model.lambda));
        }
    }

    #[test]
    fn mixed_norm_matches_oracle() {
        let f = random_image(8, 8, 11);
        let model = ModelSpec::mixed_norm(0.5, 0.05, 1.0);
        let out = denoise(&f, &model, &tight(2000)).unwrap();
        let ours = objective_value(out.image.pixels(), f.pixels(), 8, 8, &model).unwrap();
        let run = oracle_minimize(f.pixels(), 8, 8, &model, &OracleConfig::default()).unwrap();
        assert!(run.objective >= ours * (1.0 - 1e-4));
        assert!((run.objective - ours).abs() / ours <= 1e-3, "{} vs {}", run.objective, ours);
    }

    #[test]
    fn fidelity_split_with_zero_mu_matches_anisotropic() {
        let f = random_image(8, 8, 17);
        let aniso = ModelSpec::anisotropic(0.05, 1.0);
        let a = denoise(&f, &aniso, &tight(20000)).unwrap();
        let b = run_split_bregman(&f, &aniso, &tight(20000), true).unwrap();
        assert!(b.state.b1.iter().all(|v| *v == 0.0));
        let diff = dist2(a.image.pixels(), b.image.pixels());
        assert!(diff <= 1e-8, "{diff}");
    }

    #[test]
    fn deterministic() {
        let f = random_image(10, 7, 3);
        let model = ModelSpec::default_for(ModelKind::Isotropic);
        let a = denoise(&f, &model, &SolverConfig::default()).unwrap();
        let b = denoise(&f, &model, &SolverConfig::default()).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn rejects_invalid_models_and_configs() {
        let f = random_image(4, 4, 1);
        assert!(denoise(&f, &ModelSpec::mixed_norm(0.0, 0.1, 1.0), &SolverConfig::default()).is_err());
        let bad = SolverConfig {
            max_outer: 0,
            ..SolverConfig::default()
        };
        assert!(denoise(&f, &ModelSpec::default_for(ModelKind::MixedNorm), &bad).is_err());
        assert!(denoise_pipeline(&f, &[]).is_err());
    }

    #[test]
    fn inner_failure_carries_iteration() {
        let f = random_image(16, 16, 2);
        let cfg = SolverConfig {
            linear_solver: LinearSolver::ConjugateGradient,
            inner_tolerance: 1e-15,
            inner_max_iter: Some(1),
            ..SolverConfig::default()
        };
        match denoise(&f, &ModelSpec::anisotropic(1e-3, 1.0), &cfg) {
            Err(Error::Inner { iteration: 1, source }) => {
                assert!(matches!(*source, Error::NotConverged { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pipeline_single_stage_equals_denoise() {
        let f = random_image(9, 9, 8);
        let model = ModelSpec::default_for(ModelKind::OneNorm);
        let cfg = SolverConfig::default();
        assert_eq!(
            denoise_pipeline(&f, &[(model, cfg)]).unwrap(),
            denoise(&f, &model, &cfg).unwrap().image
        );
        let flat = Image::filled(5, 5, 12.0).unwrap();
        let two = denoise_pipeline(
            &flat,
            &[(model, cfg), (ModelSpec::default_for(ModelKind::Isotropic), cfg)],
        )
        .unwrap();
        assert!(two.pixels().iter().all(|p| (p - 12.0).abs() < 1e-9));
    }
}
