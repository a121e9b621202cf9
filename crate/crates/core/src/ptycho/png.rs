//! Grayscale PNG input and output.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};

use super::phantom::{normalize, object_from_images};
use crate::error::{invalid, Error, Result};
use crate::field::{ComplexField, RealField};

fn decode_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Reads an 8- or 16-bit image as luminance in `[0, 1]`.
pub fn load_grayscale_png(path: impl AsRef<Path>) -> Result<RealField> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| decode_error(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        other => other.into_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
    };
    RealField::from_vec(h, w, data)
}

/// Writes `field` as 8-bit grayscale, mapping `[lo, hi]` to `[0, 255]` with clamping.
pub fn save_grayscale_png(path: impl AsRef<Path>, field: &RealField, lo: f64, hi: f64) -> Result<()> {
    if !(hi > lo) {
        return invalid(format!("empty display range [{lo}, {hi}]"));
    }
    let path = path.as_ref();
    let (rows, cols) = field.shape();
    let img: GrayImage = ImageBuffer::from_fn(cols as u32, rows as u32, |x, y| {
        let v = (field[(y as usize, x as usize)] - lo) / (hi - lo);
        Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8])
    });
    img.save(path).map_err(|e| decode_error(path, e))
}

/// Ground truth from two images: magnitude rescaled to `[0, 1]`, phase to `[0, π/2]`.
pub fn load_truth(magnitude: impl AsRef<Path>, phase: impl AsRef<Path>) -> Result<ComplexField> {
    let mag = normalize(&load_grayscale_png(magnitude)?);
    let ph = normalize(&load_grayscale_png(phase)?);
    if mag.shape() != ph.shape() {
        return invalid(format!("magnitude image is {:?} but phase image is {:?}", mag.shape(), ph.shape()));
    }
    object_from_images(&mag, &ph)
}
