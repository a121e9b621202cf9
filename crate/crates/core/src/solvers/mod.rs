//! PIE / ePIE reconstruction with an optional partial-transform warm start.

mod driver;
mod ops;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::field::ComplexField;

pub use driver::{hybrid_solve, vanilla_solve, SolveOutcome, SolveStatus};
pub use ops::{
    converged, epie_probe_update, objective_value, pft_object_update, pft_probe_update, pie_object_update,
    project_modulus, tv_step, tv_value, TV_DELTA,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Updates driven by the cropped data through the partial transform.
    Pft,
    /// Updates driven by the full measurements.
    Fft,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Pft => "pft",
            Stage::Fft => "fft",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeOrder {
    Sequential,
    /// A fresh uniformly random permutation every sweep.
    Random,
}

/// Partial-transform parameters of the warm-start stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PftSettings {
    pub half_width: usize,
    pub p: usize,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub blind: bool,
    pub beta: f64,
    pub gamma: f64,
    pub beta_pft: f64,
    pub gamma_pft: f64,
    /// Relative-change tolerance ending the warm-start stage.
    pub eps_pft: f64,
    /// Relative-change tolerance ending the full stage.
    pub eps_stop: f64,
    pub max_pft_iters: usize,
    pub max_fft_iters: usize,
    pub lambda_fft: f64,
    pub lambda_pft: f64,
    pub order: ProbeOrder,
    pub seed: u64,
    pub pft: PftSettings,
    /// Cap on sweeps across both stages; the full stage gets what the warm start leaves.
    pub sweep_budget: Option<usize>,
    /// Evaluate the objective after every sweep for the trace; NaN otherwise.
    pub trace_objective: bool,
}

impl Default for SolverConfig {
    /// Reference step sizes and tolerances. With the unnormalised
    /// updates used here `β = 10` overshoots; see [`SolverConfig::desk_nonblind`].
    fn default() -> Self {
        Self {
            blind: false,
            beta: 10.0,
            gamma: 10.0,
            beta_pft: 1e-3,
            gamma_pft: 2e-3,
            eps_pft: 1e-2,
            eps_stop: 5e-4,
            max_pft_iters: 50,
            max_fft_iters: 500,
            lambda_fft: 1e-6,
            lambda_pft: 1e2,
            order: ProbeOrder::Sequential,
            seed: 0,
            pft: PftSettings { half_width: 64, p: 64, eps: 1e-7 },
            sweep_budget: None,
            trace_objective: true,
        }
    }
}

impl SolverConfig {
    /// Known probe, sequential order, steps tuned for a frame of
    /// `frame_pixels` pixels (the partial-transform adjoint scales by it).
    pub fn desk_nonblind(frame_pixels: usize) -> Self {
        let bp = 1.0 / frame_pixels as f64;
        Self { beta: 1.0, gamma: 1.0, beta_pft: bp, gamma_pft: bp, ..Self::default() }
    }

    /// Unknown probe, random order.
    pub fn desk_blind(frame_pixels: usize) -> Self {
        let bp = 1.0 / frame_pixels as f64;
        Self {
            blind: true,
            beta: 1.0,
            gamma: 0.01,
            beta_pft: bp,
            gamma_pft: 0.01 * bp,
            max_pft_iters: 10,
            lambda_pft: 1e3,
            order: ProbeOrder::Random,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let steps = [("beta", self.beta), ("gamma", self.gamma), ("beta_pft", self.beta_pft), ("gamma_pft", self.gamma_pft)];
        for (name, v) in steps {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("eps_pft", self.eps_pft), ("eps_stop", self.eps_stop)] {
            if !(v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("lambda_fft", self.lambda_fft), ("lambda_pft", self.lambda_pft)] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be nonnegative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconState {
    /// Object over the whole (padded) frame.
    pub z: ComplexField,
    pub probe: ComplexField,
    pub blind: bool,
    /// Completed sweeps.
    pub iteration: usize,
    pub stage: Stage,
    /// Solver time in seconds, excluding metric evaluation.
    pub elapsed: f64,
    /// Object at the start of the current sweep.
    pub prev_z: Option<ComplexField>,
}

impl ReconState {
    pub fn new(z: ComplexField, probe: ComplexField, blind: bool) -> Self {
        Self { z, probe, blind, iteration: 0, stage: Stage::Pft, elapsed: 0.0, prev_z: None }
    }
}

/// Magnitude uniform in `[0, 1]`, phase uniform in `[0, π/2]`.
pub fn random_object(rows: usize, cols: usize, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(rows, cols, |_, _| {
        let m: f64 = rng.gen();
        let ph: f64 = rng.gen::<f64>() * FRAC_PI_2;
        Complex64::from_polar(m, ph)
    })
}
