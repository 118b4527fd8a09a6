//! Benchmark configuration and the textual noise/model expressions used on
//! the command line.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mixtv_core::noise::mix64;
use mixtv_core::{ModelKind, ModelSpec, NoiseKind, NoiseSpec, SolverConfig};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SIZE: u32 = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Image files, relative to the config file.
    pub images: Vec<PathBuf>,
    pub chains: Vec<NamedChain>,
    pub models: Vec<NamedModel>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub seed: u64,
    /// Output directory, relative to the config file.
    pub output: PathBuf,
    /// Side of the square center crop; `0` keeps images at full size.
    #[serde(default = "default_size")]
    pub size: u32,
}

fn default_size() -> u32 {
    DEFAULT_SIZE
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedChain {
    pub name: String,
    pub noise: Vec<NoiseKind>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedModel {
    pub name: String,
    pub stages: Vec<StageConfig>,
}

/// One denoising stage; omitted weights take the model's defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub kind: ModelKind,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
}

impl StageConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        let mut spec = ModelSpec::default_for(self.kind);
        if let Some(mu) = self.mu {
            spec.mu = mu;
        }
        if let Some(alpha) = self.alpha {
            spec.alpha = alpha;
        }
        if let Some(lambda) = self.lambda {
            spec.lambda = lambda;
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl BenchmarkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg: BenchmarkConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.images = cfg.images.iter().map(|p| base.join(p)).collect();
        cfg.output = base.join(&cfg.output);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() || self.chains.is_empty() || self.models.is_empty() {
            bail!("config needs at least one image, one noise chain and one model");
        }
        for chain in &self.chains {
            if chain.noise.is_empty() {
                bail!("noise chain {:?} is empty", chain.name);
            }
            for kind in &chain.noise {
                kind.validate().with_context(|| format!("noise chain {:?}", chain.name))?;
            }
        }
        for model in &self.models {
            if model.stages.is_empty() {
                bail!("model {:?} has no stages", model.name);
            }
            for stage in &model.stages {
                stage.spec().with_context(|| format!("model {:?}", model.name))?;
            }
        }
        unique(self.chains.iter().map(|c| c.name.as_str()), "noise chain")?;
        unique(self.models.iter().map(|m| m.name.as_str()), "model")?;
        unique(self.images.iter().map(|p| image_name(p)), "image")?;
        Ok(())
    }
}

fn unique<'a>(names: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            bail!("duplicate {what} name {name:?}");
        }
    }
    Ok(())
}

/// File stem used to label an image in reports.
pub fn image_name(path: &Path) -> &str {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("image")
}

/// Stable seed for one (image, chain) cell: FNV-1a over the master seed
/// (little endian) and the two names, each name followed by a zero byte,
/// finished with the SplitMix64 mixer.
pub fn cell_seed(master: u64, image: &str, chain: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = master
        .to_le_bytes()
        .into_iter()
        .chain(image.bytes())
        .chain([0])
        .chain(chain.bytes())
        .chain([0]);
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// Seeds each stage of a chain with `seed + stage index`.
pub fn seeded_chain(kinds: &[NoiseKind], seed: u64) -> Vec<NoiseSpec> {
    kinds
        .iter()
        .enumerate()
        .map(|(i, kind)| NoiseSpec::new(*kind, seed.wrapping_add(i as u64)))
        .collect()
}

pub const NOISE_NAMES: [&str; 5] = ["gaussian", "salt-pepper", "poisson", "speckle", "uniform"];

/// Benchmark default parameters for a noise type.
pub fn default_noise(name: &str) -> Option<NoiseKind> {
    Some(match name {
        "gaussian" => NoiseKind::Gaussian { sigma: 25.0 },
        "salt-pepper" => NoiseKind::SaltPepper { density: 0.05 },
        "poisson" => NoiseKind::Poisson { scale: 1.0 },
        "speckle" => NoiseKind::Speckle { sigma: 0.2 },
        "uniform" => NoiseKind::Uniform { half_width: 50.0 },
        _ => return None,
    })
}

/// Parses `kind[:param=value]+kind...`, e.g. `gaussian:sigma=10+salt-pepper`.
pub fn parse_noise_chain(expr: &str) -> Result<Vec<NoiseKind>> {
    expr.split('+').map(|part| parse_noise(part.trim())).collect()
}

fn parse_noise(part: &str) -> Result<NoiseKind> {
    let (name, params) = part.split_once(':').unwrap_or((part, ""));
    let mut kind = default_noise(name).ok_or_else(|| {
        anyhow!("unknown noise type {name:?}; valid types: {}", NOISE_NAMES.join(", "))
    })?;
    for assignment in params.split(',').filter(|s| !s.is_empty()) {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("expected param=value in {assignment:?}"))?;
        let value: f64 = value
            .parse()
            .with_context(|| format!("invalid number in {assignment:?}"))?;
        let slot = match (&mut kind, key) {
            (NoiseKind::Gaussian { sigma }, "sigma") | (NoiseKind::Speckle { sigma }, "sigma") => sigma,
            (NoiseKind::SaltPepper { density }, "density") => density,
            (NoiseKind::Poisson { scale }, "scale") => scale,
            (NoiseKind::Uniform { half_width }, "half_width") => half_width,
            _ => bail!("{name} noise has no parameter {key:?}"),
        };
        *slot = value;
    }
    kind.validate()?;
    Ok(kind)
}

/// Parses `model[+model...]`, e.g. `one-norm+isotropic`.
pub fn parse_model_chain(expr: &str) -> Result<Vec<ModelKind>> {
    expr.split('+')
        .map(|name| {
            let name = name.trim();
            ModelKind::from_name(name).ok_or_else(|| {
                let valid: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                anyhow!("unknown model {name:?}; valid models: {}", valid.join(", "))
            })
        })
        .collect()
}
