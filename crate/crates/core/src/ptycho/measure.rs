//! Forward simulation `d_j = |FFT(ω ⊙ Q_j z)|` over the full frame.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::ScanPattern;
use crate::error::{invalid, Error, Result};
use crate::field::raw::{load_real, save_real};
use crate::field::{crop_centered, fast_fft2, ComplexField, RealField};

/// Photon-count noise: intensities `d²` are replaced by `Poisson(s·d²)/s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonNoise {
    pub scale: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crops {
    pub half_widths: (usize, usize),
    /// `2m̃1 × 2m̃2`, DC at `(m̃1, m̃2)`.
    pub data: Vec<RealField>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    /// Unshifted Fourier magnitudes, one frame-sized array per window.
    pub amplitudes: Vec<RealField>,
    pub crops: Option<Crops>,
    pub noise: Option<PoissonNoise>,
}

pub fn simulate(
    z_true: &ComplexField,
    pattern: &ScanPattern,
    probe: &ComplexField,
    noise: Option<PoissonNoise>,
) -> Result<MeasurementSet> {
    if let Some(n) = noise {
        if !(n.scale > 0.0 && n.scale.is_finite()) {
            return invalid(format!("noise scale must be positive, got {}", n.scale));
        }
    }
    let frame = pattern.embed_object(z_true)?;
    probe.require_shape(pattern.window_shape())?;
    let amplitudes = (0..pattern.len())
        .into_par_iter()
        .map(|j| {
            let spec = fast_fft2(&pattern.exit_wave(&frame, probe, j)?)?;
            let mut d = spec.abs();
            if let Some(n) = noise {
                let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
                rng.set_stream(j as u64);
                for v in d.data_mut() {
                    let lambda = n.scale * *v * *v;
                    let count = if lambda > 0.0 {
                        Poisson::new(lambda).map_err(|e| Error::Numerical(e.to_string()))?.sample(&mut rng)
                    } else {
                        0.0
                    };
                    *v = (count / n.scale).sqrt();
                }
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet { amplitudes, crops: None, noise })
}

/// Adds the low-frequency crops used by the partial-transform stage.
pub fn crop_measurements(ms: &MeasurementSet, m1: usize, m2: usize) -> Result<MeasurementSet> {
    let data = ms.amplitudes.iter().map(|d| crop_centered(d, m1, m2)).collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet { crops: Some(Crops { half_widths: (m1, m2), data }), ..ms.clone() })
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Writes `manifest.txt`, `d_XXXX.ptyr` and, when present, `crop_XXXX.ptyr`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut manifest = format!("probes {}\n", self.len());
        match self.noise {
            Some(n) => manifest.push_str(&format!("noise poisson {:e} {}\n", n.scale, n.seed)),
            None => manifest.push_str("noise none\n"),
        }
        if let Some(c) = &self.crops {
            manifest.push_str(&format!("crop {} {}\n", c.half_widths.0, c.half_widths.1));
        }
        for (j, d) in self.amplitudes.iter().enumerate() {
            save_real(dir.join(format!("d_{j:04}.ptyr")), d)?;
        }
        if let Some(c) = &self.crops {
            for (j, d) in c.data.iter().enumerate() {
                save_real(dir.join(format!("crop_{j:04}.ptyr")), d)?;
            }
        }
        fs::write(dir.join("manifest.txt"), manifest)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = fs::read_to_string(dir.join("manifest.txt"))?;
        let bad = |msg: &str| Error::Format(format!("measurement manifest: {msg}"));
        let (mut probes, mut noise, mut crop) = (None, None, None);
        for line in text.lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                ["probes", n] => probes = Some(n.parse::<usize>().map_err(|_| bad("bad probe count"))?),
                ["noise", "none"] => noise = None,
                ["noise", "poisson", s, seed] => {
                    noise = Some(PoissonNoise {
                        scale: s.parse().map_err(|_| bad("bad noise scale"))?,
                        seed: seed.parse().map_err(|_| bad("bad noise seed"))?,
                    })
                }
                ["crop", a, b] => {
                    crop = Some((a.parse().map_err(|_| bad("bad crop"))?, b.parse().map_err(|_| bad("bad crop"))?))
                }
                [] => {}
                _ => return Err(bad(&format!("unrecognised line {line:?}"))),
            }
        }
        let probes = probes.ok_or_else(|| bad("missing probe count"))?;
        let amplitudes =
            (0..probes).map(|j| load_real(dir.join(format!("d_{j:04}.ptyr")))).collect::<Result<Vec<_>>>()?;
        let crops = match crop {
            Some(half_widths) => Some(Crops {
                half_widths,
                data: (0..probes).map(|j| load_real(dir.join(format!("crop_{j:04}.ptyr")))).collect::<Result<_>>()?,
            }),
            None => None,
        };
        Ok(Self { amplitudes, crops, noise })
    }
}
