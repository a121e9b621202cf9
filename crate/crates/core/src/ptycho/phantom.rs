//! Synthetic test objects: magnitude in `[0, 1]`, phase in `[0, π/2]`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::field::{fast_fft2, fast_ifft2, ComplexField, RealField};

/// Rescales to `[0, 1]`; constant images map to zero.
pub fn normalize(img: &RealField) -> RealField {
    let (lo, hi) = img.min_max();
    if hi > lo {
        img.map(|v| (v - lo) / (hi - lo))
    } else {
        RealField::zeros(img.rows(), img.cols())
    }
}

/// Ellipses and bars over band-limited noise, normalised to `[0, 1]`.
pub fn phantom_image(rows: usize, cols: usize, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = ComplexField::from_fn(rows, cols, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, 0.0));
    let mut spec = fast_fft2(&noise).expect("phantom size is nonzero");
    // spectrum falling off as 1/f with a soft cutoff
    for i in 0..rows {
        for j in 0..cols {
            let fi = i.min(rows - i) as f64 / rows as f64;
            let fj = j.min(cols - j) as f64 / cols as f64;
            let f = (fi * fi + fj * fj).sqrt();
            spec[(i, j)] *= (-(f / 0.08).powi(2)).exp() / (f + 0.01);
        }
    }
    let texture = normalize(&fast_ifft2(&spec).expect("phantom size is nonzero").map(|c| c.re));

    let mut img = texture.map(|v| 0.35 * v);
    let scale = rows.min(cols) as f64;
    for _ in 0..12 {
        let (ci, cj) = (rng.gen_range(0.0..rows as f64), rng.gen_range(0.0..cols as f64));
        let (a, b) = (rng.gen_range(0.04..0.22) * scale, rng.gen_range(0.04..0.22) * scale);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let level = rng.gen_range(-0.4..0.6);
        let (s, c) = th.sin_cos();
        for i in 0..rows {
            for j in 0..cols {
                let (y, x) = (i as f64 - ci, j as f64 - cj);
                let (u, v) = (c * x + s * y, -s * x + c * y);
                if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                    img[(i, j)] += level;
                }
            }
        }
    }
    for _ in 0..4 {
        let horizontal = rng.gen_bool(0.5);
        let pos = rng.gen_range(0.1..0.9);
        let width = rng.gen_range(0.01..0.04) * scale;
        let level = rng.gen_range(0.2..0.5);
        for i in 0..rows {
            for j in 0..cols {
                let t = if horizontal { i as f64 - pos * rows as f64 } else { j as f64 - pos * cols as f64 };
                if t.abs() <= width / 2.0 {
                    img[(i, j)] += level;
                }
            }
        }
    }
    normalize(&img)
}

/// `mag · exp(i·π/2·phase)` from two images with values in `[0, 1]`.
pub fn object_from_images(magnitude: &RealField, phase: &RealField) -> Result<ComplexField> {
    phase.require_shape(magnitude.shape())?;
    let in_range = |f: &RealField| f.data().iter().all(|v| (0.0..=1.0).contains(v));
    if !in_range(magnitude) || !in_range(phase) {
        return invalid("magnitude and phase images must have values in [0, 1]");
    }
    ComplexField::from_polar(magnitude, &phase.map(|v| v * FRAC_PI_2))
}

/// Ground-truth object built from two independent phantom images.
pub fn phantom_object(n: usize, seed: u64) -> ComplexField {
    let mag = phantom_image(n, n, seed);
    let phase = phantom_image(n, n, seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    object_from_images(&mag, &phase).expect("phantom images are normalised")
}
