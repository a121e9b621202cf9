//! Normalised cross-correlation template matching.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{fast_fft2, fast_ifft2, ComplexField, RealField};

/// Scores within this of the maximum count as ties; the FFT correlation
/// carries rounding noise of roughly this size.
const TIE_TOL: f64 = 1e-9;

/// Best placement `(row, col, score)` of `template` inside `image` by NCC
/// over all placements that fit. Ties go to the smallest `(row, col)`.
pub fn register_template(image: &RealField, template: &RealField) -> Result<(usize, usize, f64)> {
    let (ir, ic) = image.shape();
    let (tr, tc) = template.shape();
    if tr == 0 || tc == 0 || tr > ir || tc > ic {
        return invalid(format!("template {tr}x{tc} must fit inside image {ir}x{ic}"));
    }
    let m = (tr * tc) as f64;
    let tmean = template.data().iter().sum::<f64>() / m;
    let t0: Vec<f64> = template.data().iter().map(|v| v - tmean).collect();
    let tnorm2: f64 = t0.iter().map(|v| v * v).sum();
    if tnorm2 <= 1e-24 * m * (1.0 + tmean * tmean) {
        return invalid("template has zero variance");
    }

    // Σ_ij I[u+i, v+j] T0[i, j] for every placement; valid placements never wrap.
    let fi = fast_fft2(&image.to_complex())?;
    let mut tp = ComplexField::zeros(ir, ic);
    for i in 0..tr {
        for j in 0..tc {
            tp[(i, j)] = Complex64::new(t0[i * tc + j], 0.0);
        }
    }
    let ft = fast_fft2(&tp)?;
    let corr = fast_ifft2(&fi.zip_map(&ft, |a, b| a * b.conj())?)?;

    // windowed sums of I and I² from integral images
    let integral = |f: &dyn Fn(f64) -> f64| {
        let mut s = vec![0.0; (ir + 1) * (ic + 1)];
        for i in 0..ir {
            for j in 0..ic {
                s[(i + 1) * (ic + 1) + j + 1] =
                    f(image[(i, j)]) + s[i * (ic + 1) + j + 1] + s[(i + 1) * (ic + 1) + j] - s[i * (ic + 1) + j];
            }
        }
        s
    };
    let s1 = integral(&|v| v);
    let s2 = integral(&|v| v * v);
    let window = |s: &[f64], u: usize, v: usize| {
        let w = ic + 1;
        s[(u + tr) * w + v + tc] - s[u * w + v + tc] - s[(u + tr) * w + v] + s[u * w + v]
    };

    let mut scores = Vec::with_capacity((ir - tr + 1) * (ic - tc + 1));
    for u in 0..=ir - tr {
        for v in 0..=ic - tc {
            let sum = window(&s1, u, v);
            let var = (window(&s2, u, v) - sum * sum / m).max(0.0);
            let den = (var * tnorm2).sqrt();
            let score = if den > 1e-12 * (tnorm2 + 1.0) { (corr[(u, v)].re / den).clamp(-1.0, 1.0) } else { 0.0 };
            scores.push((u, v, score));
        }
    }
    let best = scores.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(*scores.iter().find(|s| s.2 >= best - TIE_TOL).expect("at least one placement"))
}
