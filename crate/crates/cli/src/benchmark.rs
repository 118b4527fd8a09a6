//! The image x noise chain x model benchmark grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use mixtv_core::{add_noise_chain, denoise, metrics, Image, ModelSpec, SolverConfig, SsimConstants};
use serde::Serialize;

use crate::config::{cell_seed, image_name, seeded_chain, BenchmarkConfig};
use crate::io;

/// Model label of the row scoring the noisy input itself.
pub const NOISY: &str = "Noisy";

/// One CSV row. Metric fields are empty when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PpsReport {
    pub image: String,
    pub chain: String,
    pub model: String,
    pub status: String,
    pub mse: Option<f64>,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub pps: Option<f64>,
    pub iterations: Option<usize>,
    pub error: String,
    pub wall_seconds: f64,
}

impl PpsReport {
    fn scored(image: &str, chain: &str, model: &str, u: &Image, truth: &Image) -> Result<Self> {
        let c = SsimConstants::default();
        let mse = metrics::mse(u, truth)?;
        let psnr = metrics::psnr_from_mse(mse);
        let ssim = metrics::ssim(u, truth, c)?;
        let pps = if psnr.is_infinite() { psnr } else { psnr * ssim };
        Ok(PpsReport {
            image: image.to_owned(),
            chain: chain.to_owned(),
            model: model.to_owned(),
            status: "ok".to_owned(),
            mse: Some(mse),
            psnr: Some(psnr),
            ssim: Some(ssim),
            pps: Some(pps),
            iterations: None,
            error: String::new(),
            wall_seconds: 0.0,
        })
    }

    fn failed(image: &str, chain: &str, model: &str, err: &anyhow::Error) -> Self {
        PpsReport {
            image: image.to_owned(),
            chain: chain.to_owned(),
            model: model.to_owned(),
            status: "error".to_owned(),
            mse: None,
            psnr: None,
            ssim: None,
            pps: None,
            iterations: None,
            error: format!("{err:#}"),
            wall_seconds: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A benchmark image after cropping, labelled by its file stem.
#[derive(Debug, Clone)]
pub struct BenchImage {
    pub name: String,
    pub truth: Image,
}

pub fn load_images(cfg: &BenchmarkConfig) -> Result<Vec<BenchImage>> {
    cfg.images
        .iter()
        .map(|path| {
            let gray = io::read_gray8(path)?;
            let gray = if cfg.size == 0 { gray } else { io::square_crop(&gray, cfg.size) };
            Ok(BenchImage {
                name: image_name(path).to_owned(),
                truth: io::gray_to_image(&gray)?,
            })
        })
        .collect()
}

/// Runs the stages in order and returns the result with the total number of
/// outer iterations.
pub fn run_stages(f: &Image, stages: &[ModelSpec], solver: &SolverConfig) -> Result<(Image, usize)> {
    let mut current = f.clone();
    let mut iterations = 0;
    for (i, spec) in stages.iter().enumerate() {
        let out = denoise(&current, spec, solver)
            .with_context(|| format!("stage {} ({})", i + 1, spec.kind))?;
        iterations += out.iterations;
        current = out.image;
    }
    Ok((current, iterations))
}

/// Evaluates every cell of the grid. Rows come back sorted by image,
/// chain and model name.
pub fn run(cfg: &BenchmarkConfig, images: &[BenchImage]) -> Result<Vec<PpsReport>> {
    let models: Vec<(String, Vec<ModelSpec>)> = cfg
        .models
        .iter()
        .map(|m| Ok((m.name.clone(), m.stages.iter().map(|s| s.spec()).collect::<Result<_>>()?)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for img in images {
        for chain in &cfg.chains {
            let seed = cell_seed(cfg.seed, &img.name, &chain.name);
            let noisy = match add_noise_chain(&img.truth, &seeded_chain(&chain.noise, seed)) {
                Ok(noisy) => noisy,
                Err(e) => {
                    let err = anyhow::Error::from(e);
                    rows.push(PpsReport::failed(&img.name, &chain.name, NOISY, &err));
                    for (name, _) in &models {
                        rows.push(PpsReport::failed(&img.name, &chain.name, name, &err));
                    }
                    continue;
                }
            };
            rows.push(
                PpsReport::scored(&img.name, &chain.name, NOISY, &noisy, &img.truth)
                    .map(|mut r| {
                        r.iterations = Some(0);
                        r
                    })
                    .unwrap_or_else(|e| PpsReport::failed(&img.name, &chain.name, NOISY, &e)),
            );
            for (name, stages) in &models {
                let start = Instant::now();
                let result = run_stages(&noisy, stages, &cfg.solver).and_then(|(u, iterations)| {
                    let mut r = PpsReport::scored(&img.name, &chain.name, name, &u, &img.truth)?;
                    r.iterations = Some(iterations);
                    Ok(r)
                });
                let mut row =
                    result.unwrap_or_else(|e| PpsReport::failed(&img.name, &chain.name, name, &e));
                row.wall_seconds = start.elapsed().as_secs_f64();
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| (&a.image, &a.chain, &a.model).cmp(&(&b.image, &b.chain, &b.model)));
    Ok(rows)
}

pub fn write_csv(path: &Path, rows: &[PpsReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// PPS table for one image: one line per chain in config order, one column
/// per model with the noisy baseline first; `*` marks the best model.
pub fn format_table(cfg: &BenchmarkConfig, image: &str, rows: &[PpsReport]) -> String {
    let columns: Vec<&str> = std::iter::once(NOISY)
        .chain(cfg.models.iter().map(|m| m.name.as_str()))
        .collect();
    let widths: Vec<usize> = columns.iter().map(|c| c.len().max(8)).collect();
    let label = cfg.chains.iter().map(|c| c.name.len()).max().unwrap_or(0).max(11);

    let mut out = String::new();
    let _ = writeln!(out, "{image}: PPS (PSNR x SSIM), * = best model in row");
    let _ = write!(out, "{:<label$}", "noise chain");
    for (c, w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for chain in &cfg.chains {
        let value = |model: &str| {
            rows.iter()
                .find(|r| r.image == image && r.chain == chain.name && r.model == model)
                .and_then(|r| r.pps)
        };
        let best = cfg
            .models
            .iter()
            .filter_map(|m| value(&m.name))
            .fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(out, "{:<label$}", chain.name);
        for (c, w) in columns.iter().zip(&widths) {
            let cell = match value(c) {
                Some(v) if *c != NOISY && v == best => format!("*{v:.2}"),
                Some(v) => format!("{v:.2}"),
                None => "error".to_owned(),
            };
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub tables: Vec<PathBuf>,
}

pub fn write_outputs(cfg: &BenchmarkConfig, images: &[BenchImage], rows: &[PpsReport]) -> Result<Written> {
    std::fs::create_dir_all(&cfg.output)
        .with_context(|| format!("cannot create {}", cfg.output.display()))?;
    let csv = cfg.output.join("results.csv");
    write_csv(&csv, rows)?;
    let mut tables = Vec::new();
    for img in images {
        let path = cfg.output.join(format!("table_{}.txt", img.name));
        std::fs::write(&path, format_table(cfg, &img.name, rows))
            .with_context(|| format!("cannot write {}", path.display()))?;
        tables.push(path);
    }
    Ok(Written { csv, tables })
}
