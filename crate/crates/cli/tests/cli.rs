use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixtv::io;
use mixtv_core::Image;
use tempfile::TempDir;

fn mixtv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixtv"))
        .args(args)
        .output()
        .expect("failed to launch mixtv")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bench_image(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("bench/images")
        .join(format!("{name}.pgm"))
}

fn write_crop(dir: &Path, size: u32) -> PathBuf {
    let gray = io::square_crop(&io::read_gray8(&bench_image("cameraman")).unwrap(), size);
    let path = dir.join("crop.pgm");
    io::write_pgm(&path, &io::gray_to_image(&gray).unwrap()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pps_of(line: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix("pps="))
        .expect("pps field")
        .parse()
        .unwrap()
}

#[test]
fn add_noise_with_zero_sigma_keeps_pixels() {
    let dir = TempDir::new().unwrap();
    let input = write_crop(dir.path(), 32);
    let out = dir.path().join("noisy.pgm");
    let o = mixtv(&["add-noise", s(&input), "--noise", "gaussian:sigma=0", "--output", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(io::read_image(&out).unwrap(), io::read_image(&input).unwrap());
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("noisy.pgm.json")).unwrap()).unwrap();
    assert_eq!(sidecar["chain"][0]["kind"], "gaussian");
    assert_eq!(sidecar["chain"][0]["sigma"], 0.0);
}

#[test]
fn add_noise_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = write_crop(dir.path(), 32);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = mixtv(&[
            "add-noise",
            s(&input),
            "--noise",
            "gaussian+salt-pepper",
            "--seed",
            "42",
            "--output",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.pgm");
    assert_eq!(a, run("b.pgm"));
    assert_ne!(a, std::fs::read(&input).unwrap());
}

#[test]
fn add_noise_from_config_chain() {
    let dir = TempDir::new().unwrap();
    let input = write_crop(dir.path(), 16);
    let out = dir.path().join("n.pgm");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("bench/default.toml");
    let o = mixtv(&[
        "add-noise",
        s(&input),
        "--chain",
        "S&P + uniform",
        "--config",
        s(&config),
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sidecar = std::fs::read_to_string(dir.path().join("n.pgm.json")).unwrap();
    assert!(sidecar.contains("salt-pepper") && sidecar.contains("uniform"));
}

#[test]
fn missing_input_names_the_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.pgm");
    let o = mixtv(&["add-noise", s(&missing), "--noise", "gaussian", "--output", s(&dir.path().join("x.pgm"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nope.pgm"));
}

#[test]
fn invalid_noise_is_a_usage_error() {
    let o = mixtv(&["add-noise", "in.pgm", "--noise", "salt-pepper:density=3", "--output", "o.pgm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("density"));
}

#[test]
fn denoise_constant_image() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("flat.pgm");
    io::write_pgm(&input, &Image::filled(12, 9, 77.0).unwrap()).unwrap();
    let out = dir.path().join("out.pgm");
    let o = mixtv(&["denoise", s(&input), "--output", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(io::read_image(&out).unwrap(), io::read_image(&input).unwrap());
    let text = stdout(&o);
    let iterations: usize = text
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("iterations="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((1..=2).contains(&iterations), "{text}");
}

#[test]
fn denoise_improves_noisy_crop() {
    let dir = TempDir::new().unwrap();
    let truth = write_crop(dir.path(), 64);
    let noisy = dir.path().join("noisy.pgm");
    let o = mixtv(&["add-noise", s(&truth), "--noise", "gaussian+salt-pepper", "--seed", "7", "--output", s(&noisy)]);
    assert!(o.status.success());
    let before = mixtv(&["metrics", s(&noisy), s(&truth)]);
    assert!(before.status.success(), "{}", stderr(&before));
    let out = dir.path().join("clean.pgm");
    let after = mixtv(&["denoise", s(&noisy), "--model", "mixed-norm", "--truth", s(&truth), "--output", s(&out)]);
    assert!(after.status.success(), "{}", stderr(&after));
    let metrics_line = stdout(&after).lines().find(|l| l.starts_with("mse=")).unwrap().to_owned();
    assert!(pps_of(&metrics_line) > pps_of(stdout(&before).trim()));
}

#[test]
fn denoise_pipeline_and_overrides() {
    let dir = TempDir::new().unwrap();
    let input = write_crop(dir.path(), 16);
    let out = dir.path().join("out.pgm");
    let o = mixtv(&[
        "denoise", s(&input), "--model", "one-norm+isotropic", "--mu", "1.5", "--alpha", "0.02",
        "--lambda", "2", "--epsilon", "0.01", "--max-iter", "50", "--output", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("one-norm:") && text.contains("isotropic:"), "{text}");

    let o = mixtv(&["denoise", s(&input), "--model", "isotropic", "--mu", "1", "--output", s(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--mu"));
}

#[test]
fn unknown_model_lists_valid_names() {
    let o = mixtv(&["denoise", "in.pgm", "--model", "tv-l2", "--output", "o.pgm"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["one-norm", "isotropic", "anisotropic", "mixed-norm"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn truncated_input_exits_nonzero() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.pgm");
    std::fs::write(&input, b"P5\n2 2\n255\n").unwrap();
    let o = mixtv(&["denoise", s(&input), "--output", s(&dir.path().join("o.pgm"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bad.pgm"));
}

#[test]
fn metrics_identities() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    io::write_pgm(&a, &Image::filled(4, 4, 0.0).unwrap()).unwrap();
    io::write_pgm(&b, &Image::filled(4, 4, 255.0).unwrap()).unwrap();
    let same = stdout(&mixtv(&["metrics", s(&a), s(&a)]));
    assert!(same.contains("psnr=inf") && same.contains("ssim=1.000000"), "{same}");
    let far = stdout(&mixtv(&["metrics", s(&a), s(&b)]));
    assert!(far.contains("psnr=0.0000"), "{far}");
}

#[test]
fn png_is_read_as_luma() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.png");
    let rgb = image::RgbImage::from_fn(3, 2, |x, y| image::Rgb([(x * 100) as u8, (y * 100) as u8, 50]));
    rgb.save(&path).unwrap();
    let img = io::read_image(&path).unwrap();
    assert_eq!((img.height(), img.width()), (2, 3));
    for (x, y) in [(0u32, 0u32), (2, 1), (1, 0)] {
        let expect = (0.299 * f64::from(x * 100) + 0.587 * f64::from(y * 100) + 0.114 * 50.0).round();
        assert_eq!(img.get(y as usize, x as usize), expect);
    }
}

#[test]
fn pgm_round_trip_clamps_and_rounds() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.pgm");
    let img = Image::from_rows(&[[-4.0, 12.4, 12.6], [300.0, 0.5, 254.49]]).unwrap();
    io::write_pgm(&path, &img).unwrap();
    let back = io::read_image(&path).unwrap();
    assert_eq!(back, Image::from_rows(&[[0.0, 12.0, 13.0], [255.0, 1.0, 254.0]]).unwrap());
    assert!(std::fs::read(&path).unwrap().starts_with(b"P5"));
}
