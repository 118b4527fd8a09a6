//! Grayscale image storage and the column-major vectorization convention.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A real-valued grayscale image of `height` rows and `width` columns.
///
/// Pixels are kept column by column, so the pixel at row `i`, column `j`
/// lives at `i + j * height`. Every pixel is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl Image {
    /// Builds an image from column-major pixel data.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::param("image dimensions must be positive"));
        }
        Error::check_len(height * width, pixels.len())?;
        if !pixels.iter().all(|p| p.is_finite()) {
            return Err(Error::param("image contains non-finite intensities"));
        }
        Ok(Image {
            height,
            width,
            pixels,
        })
    }

    /// Builds an image from row slices, `rows[i][j]` being row `i`, column `j`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut pixels = Vec::with_capacity(height * width);
        for j in 0..width {
            for row in rows {
                let row = row.as_ref();
                Error::check_len(width, row.len())?;
                pixels.push(row[j]);
            }
        }
        Image::new(height, width, pixels)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Image::new(height, width, alloc::vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Pixel at row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i + j * self.height]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// Copy with every intensity clamped to `[0, 255]`.
    pub fn clamped(&self) -> Image {
        Image {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().map(|p| p.clamp(0.0, 255.0)).collect(),
        }
    }
}

/// Stacks the columns of `image` into one vector.
pub fn vectorize(image: &Image) -> Vec<f64> {
    image.pixels.clone()
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[f64], height: usize, width: usize) -> Result<Image> {
    Error::check_len(height * width, v.len())?;
    Image::new(height, width, v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn vectorize_stacks_columns() {
        let img = Image::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(vectorize(&img), vec![1.0, 3.0, 2.0, 4.0]);
        let one = Image::from_rows(&[[7.0]]).unwrap();
        assert_eq!(vectorize(&one), vec![7.0]);
    }

    #[test]
    fn unvectorize_inverts() {
        let img = unvectorize(&[1.0, 3.0, 2.0, 4.0], 2, 2).unwrap();
        assert_eq!(img, Image::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        assert_eq!(img.get(0, 1), 2.0);
        let one = unvectorize(&[5.0], 1, 1).unwrap();
        assert_eq!(one.get(0, 0), 5.0);

        let a = Image::from_rows(&[
            [0.5, 1.5, 2.5, 3.5],
            [4.0, 5.0, 6.0, 7.0],
            [8.25, 9.0, 10.0, 11.0],
        ])
        .unwrap();
        assert_eq!(unvectorize(&vectorize(&a), 3, 4).unwrap(), a);
    }

    #[test]
    fn unvectorize_rejects_bad_length() {
        assert_eq!(
            unvectorize(&[1.0; 5], 2, 2),
            Err(Error::Dimension {
                expected: 4,
                actual: 5
            })
        );
    }

    #[test]
    fn rejects_invalid_images() {
        assert!(Image::new(0, 3, vec![]).is_err());
        assert!(Image::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Image::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(Image::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn clamp_limits_range() {
        let img = Image::from_rows(&[[-3.0, 300.0, 12.5]]).unwrap();
        assert_eq!(img.clamped().pixels(), &[0.0, 255.0, 12.5]);
    }
}
