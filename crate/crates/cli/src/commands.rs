use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mixtv_core::{add_noise_chain, denoise, metrics, Image, ModelSpec, SolverConfig, SsimConstants};
use serde::Serialize;

use crate::benchmark;
use crate::config::{parse_model_chain, parse_noise_chain, seeded_chain, BenchmarkConfig};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "mixtv", version, about = "Mixed-norm total-variation denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrupt an image with a seeded noise chain.
    AddNoise(AddNoiseArgs),
    /// Denoise an image with one model or a `+`-joined pipeline of models.
    Denoise(DenoiseArgs),
    /// Run the image x noise x model grid described by a config file.
    Benchmark(BenchmarkArgs),
    /// Print MSE, PSNR, SSIM and PPS of an image against a reference.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    pub input: PathBuf,
    /// Noise expression such as `gaussian:sigma=25+salt-pepper:density=0.05`.
    #[arg(long, conflicts_with = "chain", value_parser = noise_arg)]
    pub noise: Option<String>,
    /// Name of a noise chain in the file given by --config.
    #[arg(long, requires = "config")]
    pub chain: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output PGM; a JSON record of the applied noise is written next to it
    /// with `.json` appended.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    /// Model name, or several joined by `+` to run in sequence.
    #[arg(long, default_value = "mixed-norm", value_parser = model_arg)]
    pub model: String,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Outer stopping tolerance on the iterate change.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Reference image for a metric report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the output directory of the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub image: PathBuf,
    pub reference: PathBuf,
}

fn noise_arg(s: &str) -> Result<String, String> {
    parse_noise_chain(s).map(|_| s.to_owned()).map_err(|e| format!("{e:#}"))
}

fn model_arg(s: &str) -> Result<String, String> {
    parse_model_chain(s).map(|_| s.to_owned()).map_err(|e| format!("{e:#}"))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::AddNoise(a) => add_noise_cmd(&a).map(|()| ExitCode::SUCCESS),
        Command::Denoise(a) => denoise_cmd(&a).map(|()| ExitCode::SUCCESS),
        Command::Benchmark(a) => benchmark_cmd(&a),
        Command::Metrics(a) => metrics_cmd(&a).map(|()| ExitCode::SUCCESS),
    }
}

#[derive(Serialize)]
struct NoiseRecord<'a> {
    input: &'a Path,
    seed: u64,
    chain: &'a [mixtv_core::NoiseSpec],
}

fn add_noise_cmd(a: &AddNoiseArgs) -> Result<()> {
    let kinds = match (&a.noise, &a.chain, &a.config) {
        (Some(expr), _, _) => parse_noise_chain(expr)?,
        (None, Some(name), Some(cfg)) => BenchmarkConfig::load(cfg)?
            .chains
            .into_iter()
            .find(|c| &c.name == name)
            .ok_or_else(|| anyhow!("no noise chain named {name:?} in {}", cfg.display()))?
            .noise,
        _ => bail!("give either --noise or --chain with --config"),
    };
    let image = io::read_image(&a.input)?;
    let specs = seeded_chain(&kinds, a.seed);
    let noisy = add_noise_chain(&image, &specs)?;
    io::write_pgm(&a.output, &noisy)?;
    let record = NoiseRecord {
        input: &a.input,
        seed: a.seed,
        chain: &specs,
    };
    let sidecar = sidecar_path(&a.output);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&record)? + "\n")
        .with_context(|| format!("cannot write {}", sidecar.display()))?;
    Ok(())
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Builds the stage list, applying each override to the stages whose model
/// uses that weight.
pub fn model_stages(a: &DenoiseArgs) -> Result<Vec<ModelSpec>> {
    let kinds = parse_model_chain(&a.model)?;
    let mut stages: Vec<ModelSpec> = kinds.iter().map(|k| ModelSpec::default_for(*k)).collect();
    if let Some(mu) = a.mu {
        let mut used = false;
        for s in stages.iter_mut().filter(|s| s.kind.splits_fidelity()) {
            s.mu = mu;
            used = true;
        }
        if !used {
            bail!("--mu only applies to the one-norm and mixed-norm models");
        }
    }
    if let Some(alpha) = a.alpha {
        let mut used = false;
        for s in stages.iter_mut().filter(|s| s.kind != mixtv_core::ModelKind::OneNorm) {
            s.alpha = alpha;
            used = true;
        }
        if !used {
            bail!("--alpha does not apply to the one-norm model");
        }
    }
    if let Some(lambda) = a.lambda {
        for s in &mut stages {
            s.lambda = lambda;
        }
    }
    for s in &stages {
        s.validate()?;
    }
    Ok(stages)
}

fn denoise_cmd(a: &DenoiseArgs) -> Result<()> {
    let stages = model_stages(a)?;
    let solver = SolverConfig {
        tolerance: a.epsilon,
        max_outer: a.max_iter.unwrap_or(SolverConfig::default().max_outer),
        ..SolverConfig::default()
    };
    let input = io::read_image(&a.input)?;
    let truth = a.truth.as_deref().map(io::read_image).transpose()?;

    let mut current = input;
    for (i, spec) in stages.iter().enumerate() {
        let out = denoise(&current, spec, &solver)
            .with_context(|| format!("{} failed (stage {})", spec.kind, i + 1))?;
        println!(
            "{}: iterations={} stop={:?}",
            spec.kind,
            out.iterations,
            out.stop
        );
        current = out.image;
    }
    io::write_pgm(&a.output, &current)?;
    if let Some(truth) = truth {
        print_metrics(&current, &truth)?;
    }
    Ok(())
}

fn print_metrics(u: &Image, truth: &Image) -> Result<()> {
    let c = SsimConstants::default();
    let mse = metrics::mse(u, truth)?;
    let psnr = metrics::psnr_from_mse(mse);
    let ssim = metrics::ssim(u, truth, c)?;
    let pps = metrics::pps(u, truth, c)?;
    println!("mse={mse:.4} psnr={psnr:.4} ssim={ssim:.6} pps={pps:.4}");
    Ok(())
}

fn metrics_cmd(a: &MetricsArgs) -> Result<()> {
    print_metrics(&io::read_image(&a.image)?, &io::read_image(&a.reference)?)
}

fn benchmark_cmd(a: &BenchmarkArgs) -> Result<ExitCode> {
    let mut cfg = BenchmarkConfig::load(&a.config)?;
    if let Some(out) = &a.output {
        cfg.output = out.clone();
    }
    let images = benchmark::load_images(&cfg)?;
    let rows = benchmark::run(&cfg, &images)?;
    let written = benchmark::write_outputs(&cfg, &images, &rows)?;
    for img in &images {
        println!("{}", benchmark::format_table(&cfg, &img.name, &rows));
    }
    println!("wrote {}", written.csv.display());
    let failed: Vec<_> = rows.iter().filter(|r| !r.is_ok()).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for r in &failed {
            eprintln!("failed: {} / {} / {}: {}", r.image, r.chain, r.model, r.error);
        }
        Ok(ExitCode::FAILURE)
    }
}
