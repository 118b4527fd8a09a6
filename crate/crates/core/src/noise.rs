//! Seeded synthesis of Gaussian, salt-and-pepper, Poisson, speckle and
//! uniform noise.
//!
//! # Random stream
//!
//! All randomness comes from SplitMix64 (increment `0x9E3779B97F4A7C15`,
//! output mix multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`,
//! shifts 30/27/31). A spec's `seed` is first mixed into a stream key,
//! `key = mix(seed)`. Pixel `i` (column-major index) then draws from its
//! own SplitMix64 generator whose state starts at
//! `mix(key + (i + 1) * 0xD1B54A32D192ED03)`, so every pixel's noise depends
//! only on `(seed, i)` and can be generated in any order.
//!
//! Uniform deviates are `(next >> 11) * 2^-53` in `[0, 1)`. Normal deviates
//! use one Box-Muller draw, `sqrt(-2 ln(1 - u1)) cos(2 pi u2)`. Poisson
//! deviates use Knuth's product-of-uniforms method, applied in chunks of
//! mean at most 500 so that `exp(-mean)` stays representable.
//!
//! No clamping is applied; exported files clamp to `[0, 255]`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const PIXEL_STRIDE: u64 = 0xD1B5_4A32_D192_ED03;
const POISSON_CHUNK: f64 = 500.0;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        SplitMix64 { state }
    }

    /// Generator for pixel `index` of the stream keyed by `seed`.
    pub fn for_pixel(seed: u64, index: usize) -> Self {
        let key = mix64(seed);
        SplitMix64::new(mix64(
            key.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(PIXEL_STRIDE)),
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    pub fn next_poisson(&mut self, mean: f64) -> f64 {
        let mut remaining = mean.max(0.0);
        let mut total = 0u64;
        while remaining > 0.0 {
            let chunk = remaining.min(POISSON_CHUNK);
            remaining -= chunk;
            let limit = libm::exp(-chunk);
            let mut p = self.next_f64();
            while p > limit {
                total += 1;
                p *= self.next_f64();
            }
        }
        total as f64
    }
}

/// Noise type and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum NoiseKind {
    /// Additive `N(0, sigma^2)`.
    Gaussian { sigma: f64 },
    /// Each pixel becomes 0 with probability `density / 2` and 255 with
    /// probability `density / 2`.
    SaltPepper { density: f64 },
    /// `Poisson(pixel * scale) / scale`; negative intensities count as zero.
    Poisson { scale: f64 },
    /// Multiplicative `pixel * (1 + N(0, sigma^2))`.
    Speckle { sigma: f64 },
    /// Additive `U(-half_width, half_width)`.
    Uniform { half_width: f64 },
}

impl NoiseKind {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        match *self {
            NoiseKind::Gaussian { sigma } | NoiseKind::Speckle { sigma } => nonneg("sigma", sigma),
            NoiseKind::SaltPepper { density } => {
                if (0.0..=1.0).contains(&density) {
                    Ok(())
                } else {
                    Err(Error::param(format!("density must lie in [0, 1], got {density}")))
                }
            }
            NoiseKind::Poisson { scale } => {
                if scale.is_finite() && scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::param(format!("poisson scale must be positive, got {scale}")))
                }
            }
            NoiseKind::Uniform { half_width } => nonneg("half_width", half_width),
        }
    }

    fn corrupt(&self, pixel: f64, rng: &mut SplitMix64) -> f64 {
        match *self {
            NoiseKind::Gaussian { sigma } => pixel + sigma * rng.next_normal(),
            NoiseKind::SaltPepper { density } => {
                let draw = rng.next_f64();
                if draw < density / 2.0 {
                    0.0
                } else if draw < density {
                    255.0
                } else {
                    pixel
                }
            }
            NoiseKind::Poisson { scale } => rng.next_poisson(pixel * scale) / scale,
            NoiseKind::Speckle { sigma } => pixel * (1.0 + sigma * rng.next_normal()),
            NoiseKind::Uniform { half_width } => pixel + half_width * (2.0 * rng.next_f64() - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        NoiseSpec { kind, seed }
    }
}

pub fn add_noise(image: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.kind.validate()?;
    let pixels: Vec<f64> = image
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &p)| spec.kind.corrupt(p, &mut SplitMix64::for_pixel(spec.seed, i)))
        .collect();
    Image::new(image.height(), image.width(), pixels)
}

/// Applies the specs in order, each to the previous result.
pub fn add_noise_chain(image: &Image, specs: &[NoiseSpec]) -> Result<Image> {
    if specs.is_empty() {
        return Err(Error::param("noise chain needs at least one spec"));
    }
    let mut out = image.clone();
    for spec in specs {
        out = add_noise(&out, spec)?;
    }
    Ok(out)
}
