//! Grayscale image files.
//!
//! 8-bit binary PGM (P5) is read and written; PNG is read only and
//! converted to gray with `0.299 R + 0.587 G + 0.114 B`. Pixel values are
//! clamped to `[0, 255]` and rounded when written.

use std::path::Path;

use anyhow::{bail, Context, Result};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::imageops::{self, FilterType};
use image::{DynamicImage, ExtendedColorType, GrayImage, ImageFormat, ImageReader};
use mixtv_core::Image;

/// Reads a PGM or PNG file as an 8-bit gray raster.
pub fn read_gray8(path: &Path) -> Result<GrayImage> {
    let reader = ImageReader::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?
        .with_guessed_format()
        .with_context(|| format!("cannot read {}", path.display()))?;
    let format = reader.format();
    let decoded = reader
        .decode()
        .with_context(|| format!("cannot decode {}", path.display()))?;
    match format {
        Some(ImageFormat::Pnm) => match decoded {
            DynamicImage::ImageLuma8(gray) => Ok(gray),
            _ => bail!("{}: only 8-bit grayscale PGM is supported", path.display()),
        },
        Some(ImageFormat::Png) => Ok(luma_from_rgb(&decoded)),
        _ => bail!("{}: unsupported image format (expected PGM or PNG)", path.display()),
    }
}

fn luma_from_rgb(img: &DynamicImage) -> GrayImage {
    let rgb = img.to_rgb8();
    GrayImage::from_fn(rgb.width(), rgb.height(), |x, y| {
        let [r, g, b] = rgb.get_pixel(x, y).0;
        let l = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
        image::Luma([l.round().clamp(0.0, 255.0) as u8])
    })
}

pub fn gray_to_image(gray: &GrayImage) -> Result<Image> {
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let mut pixels = vec![0.0; w * h];
    for (x, y, p) in gray.enumerate_pixels() {
        pixels[y as usize + x as usize * h] = f64::from(p.0[0]);
    }
    Ok(Image::new(h, w, pixels)?)
}

pub fn image_to_gray(img: &Image) -> GrayImage {
    GrayImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        let v = img.get(y as usize, x as usize);
        image::Luma([v.clamp(0.0, 255.0).round() as u8])
    })
}

pub fn read_image(path: &Path) -> Result<Image> {
    gray_to_image(&read_gray8(path)?)
}

/// Center-crops to a square and resamples it to `size x size`.
pub fn square_crop(gray: &GrayImage, size: u32) -> GrayImage {
    let side = gray.width().min(gray.height());
    let x0 = (gray.width() - side) / 2;
    let y0 = (gray.height() - side) / 2;
    let cropped = imageops::crop_imm(gray, x0, y0, side, side).to_image();
    if side == size {
        cropped
    } else {
        imageops::resize(&cropped, size, size, FilterType::Triangle)
    }
}

pub fn write_pgm(path: &Path, img: &Image) -> Result<()> {
    let gray = image_to_gray(img);
    let mut bytes = Vec::new();
    PnmEncoder::new(&mut bytes)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .encode(gray.as_raw().as_slice(), gray.width(), gray.height(), ExtendedColorType::L8)
        .context("cannot encode PGM")?;
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}
