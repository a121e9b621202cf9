//! Image-quality metrics and template registration.

mod register;
mod trace;

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result};
use crate::field::{ComplexField, RealField};

pub use register::register_template;
pub use trace::{ImageMetrics, MetricTrace, TraceRow, PSNR_CAP};

/// `‖z − truth‖ / ‖truth‖` (Frobenius).
pub fn relative_error(z: &ComplexField, truth: &ComplexField) -> Result<f64> {
    z.require_shape(truth.shape())?;
    let den = truth.norm();
    if den == 0.0 {
        return invalid("relative error against an all-zero reference");
    }
    let num: f64 = z.data().iter().zip(truth.data()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num.sqrt() / den)
}

/// Real-array variant, used for magnitude and phase images.
pub fn relative_error_real(x: &RealField, truth: &RealField) -> Result<f64> {
    x.require_shape(truth.shape())?;
    let den = truth.norm();
    if den == 0.0 {
        return invalid("relative error against an all-zero reference");
    }
    let num: f64 = x.data().iter().zip(truth.data()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(num.sqrt() / den)
}

/// Relative error after the best global phase factor is applied to `z`.
pub fn phase_aligned_relative_error(z: &ComplexField, truth: &ComplexField) -> Result<f64> {
    let ip = z.inner(truth)?;
    let rot = if ip.norm() > 0.0 { ip / ip.norm() } else { 1.0.into() };
    relative_error(&z.map(|c| c * rot), truth)
}

/// `10·log10(range² / MSE)`; infinite for identical images.
pub fn psnr(x: &RealField, reference: &RealField, data_range: f64) -> Result<f64> {
    x.require_shape(reference.shape())?;
    if !(data_range > 0.0) {
        return invalid(format!("data range must be positive, got {data_range}"));
    }
    let mse = x.data().iter().zip(reference.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (data_range * data_range / mse).log10() })
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Normalised 1D Gaussian taps of the SSIM window.
pub fn ssim_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Separable Gaussian filter, evaluated only where the window fits.
fn filter_valid(img: &[f64], rows: usize, cols: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (vr, vc) = (rows - SSIM_WINDOW + 1, cols - SSIM_WINDOW + 1);
    let mut tmp = vec![0.0; rows * vc];
    for i in 0..rows {
        let row = &img[i * cols..(i + 1) * cols];
        for j in 0..vc {
            tmp[i * vc + j] = taps.iter().zip(&row[j..j + SSIM_WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; vr * vc];
    for i in 0..vr {
        for (k, t) in taps.iter().enumerate() {
            let src = &tmp[(i + k) * vc..(i + k + 1) * vc];
            for (o, v) in out[i * vc..(i + 1) * vc].iter_mut().zip(src) {
                *o += t * v;
            }
        }
    }
    out
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5)
/// over every position where the window fits inside the image.
pub fn ssim(x: &RealField, reference: &RealField, data_range: f64) -> Result<f64> {
    x.require_shape(reference.shape())?;
    let (rows, cols) = x.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return invalid(format!("SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {rows}x{cols}"));
    }
    if !(data_range > 0.0) {
        return invalid(format!("data range must be positive, got {data_range}"));
    }
    let taps = ssim_taps();
    let (a, b) = (x.data(), reference.data());
    let prod = |f: &dyn Fn(usize) -> f64| (0..a.len()).map(f).collect::<Vec<f64>>();
    let ux = filter_valid(a, rows, cols, &taps);
    let uy = filter_valid(b, rows, cols, &taps);
    let uxx = filter_valid(&prod(&|i| a[i] * a[i]), rows, cols, &taps);
    let uyy = filter_valid(&prod(&|i| b[i] * b[i]), rows, cols, &taps);
    let uxy = filter_valid(&prod(&|i| a[i] * b[i]), rows, cols, &taps);
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let total: f64 = (0..ux.len())
        .map(|k| {
            let (mx, my) = (ux[k], uy[k]);
            let vx = uxx[k] - mx * mx;
            let vy = uyy[k] - my * my;
            let cxy = uxy[k] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / ux.len() as f64)
}

/// Magnitude image range.
pub const MAGNITUDE_RANGE: f64 = 1.0;
/// Phase image range.
pub const PHASE_RANGE: f64 = FRAC_PI_2;
