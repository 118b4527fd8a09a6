//! TV model selection and objective evaluation.
//!
//! Every model here has the shape
//!
//! ```text
//! R(u) + mu |u - f|_1 + alpha |u - f|_2^2
//! ```
//!
//! where `R` is either the anisotropic regularizer `|Dx u|_1 + |Dy u|_1` or
//! the isotropic one `sum_i sqrt((Dx u)_i^2 + (Dy u)_i^2)`. For the classic
//! isotropic and anisotropic models `alpha` stands for `mu / 2` in their
//! usual `mu/2 |u - f|^2` formulation.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ModelKind {
    /// Anisotropic TV with an `l1` data term.
    OneNorm,
    /// Isotropic TV with a squared `l2` data term.
    Isotropic,
    /// Anisotropic TV with a squared `l2` data term.
    Anisotropic,
    /// Anisotropic TV with both `l1` and squared `l2` data terms.
    MixedNorm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::OneNorm,
        ModelKind::Isotropic,
        ModelKind::Anisotropic,
        ModelKind::MixedNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::OneNorm => "one-norm",
            ModelKind::Isotropic => "isotropic",
            ModelKind::Anisotropic => "anisotropic",
            ModelKind::MixedNorm => "mixed-norm",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ModelKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the regularizer couples the two gradient components per pixel.
    pub fn is_isotropic(self) -> bool {
        self == ModelKind::Isotropic
    }

    /// Whether the solver splits off the `l1` data term as its own variable.
    pub fn splits_fidelity(self) -> bool {
        matches!(self, ModelKind::OneNorm | ModelKind::MixedNorm)
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// A model together with its weights and the Bregman penalty `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Weight of `|u - f|_1`.
    pub mu: f64,
    /// Weight of `|u - f|_2^2`.
    pub alpha: f64,
    /// Penalty coefficient of the split constraints; affects the iteration
    /// path but not the minimizer.
    pub lambda: f64,
}

impl ModelSpec {
    pub fn mixed_norm(mu: f64, alpha: f64, lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::MixedNorm,
            mu,
            alpha,
            lambda,
        }
    }

    pub fn one_norm(mu: f64, lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::OneNorm,
            mu,
            alpha: 0.0,
            lambda,
        }
    }

    pub fn isotropic(alpha: f64, lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Isotropic,
            mu: 0.0,
            alpha,
            lambda,
        }
    }

    pub fn anisotropic(alpha: f64, lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Anisotropic,
            mu: 0.0,
            alpha,
            lambda,
        }
    }

    /// Default weights for `kind`: `lambda = 1`, `mu = 1`, `alpha = 0.01`
    /// where the model uses them. These are tuning defaults, not derived
    /// values.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::OneNorm => ModelSpec::one_norm(1.0, 1.0),
            ModelKind::Isotropic => ModelSpec::isotropic(0.01, 1.0),
            ModelKind::Anisotropic => ModelSpec::anisotropic(0.01, 1.0),
            ModelKind::MixedNorm => ModelSpec::mixed_norm(1.0, 0.01, 1.0),
        }
    }

    /// Checks finiteness and signs shared by every model.
    pub(crate) fn validate_weights(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !ok(self.mu) || !ok(self.alpha) {
            return Err(Error::param(format!(
                "mu and alpha must be finite and nonnegative, got mu={} alpha={}",
                self.mu, self.alpha
            )));
        }
        if !self.kind.splits_fidelity() && self.alpha == 0.0 {
            return Err(Error::param("the u-system needs alpha > 0 when the l1 term is not split"));
        }
        Ok(())
    }

    /// Checks the parameter pattern each model is defined with.
    pub fn validate(&self) -> Result<()> {
        self.validate_weights()?;
        let (mu_pos, alpha_pos) = (self.mu > 0.0, self.alpha > 0.0);
        let ok = match self.kind {
            ModelKind::MixedNorm => mu_pos && alpha_pos,
            ModelKind::OneNorm => mu_pos && self.alpha == 0.0,
            ModelKind::Isotropic | ModelKind::Anisotropic => self.mu == 0.0 && alpha_pos,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!(
                "{} model does not accept mu={} alpha={}",
                self.kind, self.mu, self.alpha
            )))
        }
    }
}

/// The regularizer `R(u)` for a `height x width` image.
pub(crate) fn regularizer(u: &[f64], height: usize, width: usize, isotropic: bool) -> f64 {
    let mut total = 0.0;
    for j in 0..width {
        for i in 0..height {
            let k = i + j * height;
            let dx = if j + 1 < width { u[k + height] - u[k] } else { 0.0 };
            let dy = if i + 1 < height { u[k + 1] - u[k] } else { 0.0 };
            total += if isotropic {
                libm::hypot(dx, dy)
            } else {
                dx.abs() + dy.abs()
            };
        }
    }
    total
}

/// Value of the selected model's objective at `u` for observation `f`.
pub fn objective_value(u: &[f64], f: &[f64], height: usize, width: usize, model: &ModelSpec) -> Result<f64> {
    Error::check_len(height * width, u.len())?;
    Error::check_len(height * width, f.len())?;
    let reg = regularizer(u, height, width, model.kind.is_isotropic());
    let (l1, l2sq) = u.iter().zip(f).fold((0.0, 0.0), |(a, b), (x, y)| {
        let r = x - y;
        (a + r.abs(), b + r * r)
    });
    Ok(reg + model.mu * l1 + model.alpha * l2sq)
}
