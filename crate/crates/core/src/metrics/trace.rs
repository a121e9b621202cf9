//! Per-iteration solver history.

use std::fmt::Write as _;
use std::path::Path;

use super::{phase_aligned_relative_error, psnr, relative_error, relative_error_real, ssim, MAGNITUDE_RANGE, PHASE_RANGE};
use crate::error::{invalid, Result};
use crate::field::ComplexField;
use crate::solvers::Stage;

/// PSNR written to CSV for identical images.
pub const PSNR_CAP: f64 = 99.0;

pub const CSV_HEADER: &str = "iteration,stage,wall_s,objective,rel_err,rel_err_mag,rel_err_phase,ssim_mag,ssim_phase,psnr_mag,psnr_phase,rel_err_phase_aligned";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageMetrics {
    pub rel_err: f64,
    pub rel_err_mag: f64,
    pub rel_err_phase: f64,
    pub ssim_mag: f64,
    pub ssim_phase: f64,
    pub psnr_mag: f64,
    pub psnr_phase: f64,
    /// Diagnostic only: relative error after removing a global phase factor.
    pub rel_err_phase_aligned: f64,
}

impl ImageMetrics {
    /// Compares a reconstruction with the ground truth; phases are `arg(z)`
    /// without unwrapping.
    pub fn compute(z: &ComplexField, truth: &ComplexField) -> Result<Self> {
        let (mag, tmag) = (z.abs(), truth.abs());
        let (ph, tph) = (z.arg(), truth.arg());
        Ok(Self {
            rel_err: relative_error(z, truth)?,
            rel_err_mag: relative_error_real(&mag, &tmag)?,
            rel_err_phase: relative_error_real(&ph, &tph)?,
            ssim_mag: ssim(&mag, &tmag, MAGNITUDE_RANGE)?,
            ssim_phase: ssim(&ph, &tph, PHASE_RANGE)?,
            psnr_mag: psnr(&mag, &tmag, MAGNITUDE_RANGE)?,
            psnr_phase: psnr(&ph, &tph, PHASE_RANGE)?,
            rel_err_phase_aligned: phase_aligned_relative_error(z, truth)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub stage: Stage,
    pub wall_s: f64,
    pub objective: f64,
    pub metrics: Option<ImageMetrics>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricTrace {
    rows: Vec<TraceRow>,
    /// Index of the first row after the switch from the partial-transform stage.
    transition: Option<usize>,
}

impl MetricTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn transition(&self) -> Option<usize> {
        self.transition
    }

    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if let Some(prev) = self.rows.last() {
            if row.iteration <= prev.iteration || row.wall_s < prev.wall_s {
                return invalid("trace rows must have increasing iterations and nondecreasing wall time");
            }
            if prev.stage == Stage::Fft && row.stage == Stage::Pft {
                return invalid("stage order is partial transform first, then full transform");
            }
            if prev.stage == Stage::Pft && row.stage == Stage::Fft {
                self.transition = Some(self.rows.len());
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{:.6},{:.17e}", r.iteration, r.stage.tag(), r.wall_s, r.objective);
            match &r.metrics {
                Some(m) => {
                    let cap = |v: f64| v.min(PSNR_CAP);
                    let _ = write!(
                        s,
                        ",{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6},{:.6},{:.17e}",
                        m.rel_err,
                        m.rel_err_mag,
                        m.rel_err_phase,
                        m.ssim_mag,
                        m.ssim_phase,
                        cap(m.psnr_mag),
                        cap(m.psnr_phase),
                        m.rel_err_phase_aligned
                    );
                }
                None => s.push_str(",,,,,,,,"),
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
