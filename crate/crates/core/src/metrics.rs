//! Image similarity measures on the 255-peak intensity scale.
//!
//! PSNR is reported as `f64::INFINITY` for identical images, and PPS
//! (PSNR times SSIM) inherits that marker.

use crate::error::{Error, Result};
use crate::image::Image;

/// Peak intensity used by PSNR.
pub const PEAK: f64 = 255.0;

/// Stabilizing constants of the SSIM quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SsimConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimConstants {
    /// `(0.01 * 255)^2` and `(0.03 * 255)^2`.
    fn default() -> Self {
        SsimConstants {
            c1: (0.01 * PEAK) * (0.01 * PEAK),
            c2: (0.03 * PEAK) * (0.03 * PEAK),
        }
    }
}

fn same_shape(u: &Image, t: &Image) -> Result<()> {
    if u.same_shape(t) {
        Ok(())
    } else {
        Err(Error::Shape {
            expected: (t.height(), t.width()),
            actual: (u.height(), u.width()),
        })
    }
}

pub fn mse(u: &Image, t: &Image) -> Result<f64> {
    same_shape(u, t)?;
    let sum: f64 = u
        .pixels()
        .iter()
        .zip(t.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / u.len() as f64)
}

/// `10 log10(255^2 / MSE)`, infinite when the images are equal.
pub fn psnr(u: &Image, t: &Image) -> Result<f64> {
    Ok(psnr_from_mse(mse(u, t)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(PEAK * PEAK / mse)
    }
}

/// Global (single-window) SSIM with population statistics.
pub fn ssim(u: &Image, t: &Image, c: SsimConstants) -> Result<f64> {
    same_shape(u, t)?;
    if u.len() < 2 {
        return Err(Error::param("ssim needs at least two pixels"));
    }
    let count = u.len() as f64;
    let mean = |img: &Image| img.pixels().iter().sum::<f64>() / count;
    let (mu_u, mu_t) = (mean(u), mean(t));
    let (mut var_u, mut var_t, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in u.pixels().iter().zip(t.pixels()) {
        let (du, dt) = (a - mu_u, b - mu_t);
        var_u += du * du;
        var_t += dt * dt;
        cov += du * dt;
    }
    let (var_u, var_t, cov) = (var_u / count, var_t / count, cov / count);
    let num = (2.0 * mu_u * mu_t + c.c1) * (2.0 * cov + c.c2);
    let den = (mu_u * mu_u + mu_t * mu_t + c.c1) * (var_u + var_t + c.c2);
    Ok(num / den)
}

/// PSNR times SSIM.
pub fn pps(u: &Image, t: &Image, c: SsimConstants) -> Result<f64> {
    let p = psnr(u, t)?;
    if p.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(p * ssim(u, t, c)?)
}
