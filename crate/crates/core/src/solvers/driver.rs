//! Two-stage driver: partial-transform sweeps on cropped data, then full sweeps.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ops::{
    converged, epie_probe_update, objective_value, pft_object_update, pft_probe_update, pie_object_update, tv_step,
};
use super::{ProbeOrder, ReconState, SolverConfig, Stage};
use crate::error::{invalid, Error, Result};
use crate::field::ComplexField;
use crate::metrics::{ImageMetrics, MetricTrace, TraceRow};
use crate::pft::{pft_plan_2d, PftPlan2D};
use crate::ptycho::{MeasurementSet, ScanPattern};

/// Probe growth beyond this factor of its initial norm aborts the run.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub enum SolveStatus {
    /// The full stage met its relative-change tolerance.
    Converged,
    MaxIterations,
    /// Aborted; the state holds the last iterate.
    Diverged(String),
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub state: ReconState,
    pub trace: MetricTrace,
    pub status: SolveStatus,
    /// State at the end of the warm-start stage, when one ran.
    pub warm_start: Option<ReconState>,
}

/// Plain (e)PIE: the hybrid driver with no warm-start sweeps.
pub fn vanilla_solve(
    ms: &MeasurementSet,
    pattern: &ScanPattern,
    probe_init: &ComplexField,
    z_init: &ComplexField,
    cfg: &SolverConfig,
    truth: Option<&ComplexField>,
) -> Result<SolveOutcome> {
    let cfg = SolverConfig { max_pft_iters: 0, ..cfg.clone() };
    hybrid_solve(ms, pattern, probe_init, z_init, &cfg, truth)
}

/// Runs up to `max_pft_iters` partial-transform sweeps, then full sweeps
/// from that iterate. `truth` is the unpadded object; when given, every
/// trace row carries image metrics over the object region.
pub fn hybrid_solve(
    ms: &MeasurementSet,
    pattern: &ScanPattern,
    probe_init: &ComplexField,
    z_init: &ComplexField,
    cfg: &SolverConfig,
    truth: Option<&ComplexField>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    z_init.require_shape(pattern.frame_shape())?;
    probe_init.require_shape(pattern.window_shape())?;
    if let Some(t) = truth {
        t.require_shape(pattern.object_shape())?;
    }
    if pattern.len() != ms.len() {
        return invalid(format!("{} windows but {} measurements", pattern.len(), ms.len()));
    }
    let plan = if cfg.max_pft_iters > 0 { Some(stage_plan(ms, pattern, cfg)?) } else { None };

    let mut state = ReconState::new(z_init.clone(), probe_init.clone(), cfg.blind);
    let mut trace = MetricTrace::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pattern.len()).collect();
    let probe_norm0 = probe_init.norm().max(f64::MIN_POSITIVE);
    let mut status = SolveStatus::MaxIterations;
    let mut warm_start = None;

    let stages = [
        (Stage::Pft, cfg.max_pft_iters, cfg.eps_pft, cfg.lambda_pft * cfg.beta_pft),
        (Stage::Fft, cfg.max_fft_iters, cfg.eps_stop, cfg.lambda_fft * cfg.beta),
    ];
    'stages: for (stage, iters, tol, tv_weight) in stages {
        if iters == 0 {
            continue;
        }
        if stage == Stage::Fft && state.iteration > 0 {
            warm_start = Some(state.clone());
        }
        state.stage = stage;
        for _ in 0..iters {
            if cfg.sweep_budget.is_some_and(|b| state.iteration >= b) {
                break 'stages;
            }
            let start = Instant::now();
            let prev = state.z.clone();
            if cfg.order == ProbeOrder::Random {
                order.shuffle(&mut rng);
            }
            for &j in &order {
                match (stage, plan.as_ref()) {
                    (Stage::Pft, Some(plan)) => {
                        pft_object_update(&mut state, pattern, ms, j, cfg.beta_pft, plan)?;
                        if cfg.blind {
                            pft_probe_update(&mut state, pattern, ms, j, cfg.gamma_pft, plan)?;
                        }
                    }
                    _ => {
                        pie_object_update(&mut state, pattern, ms, j, cfg.beta)?;
                        if cfg.blind {
                            epie_probe_update(&mut state, pattern, ms, j, cfg.gamma)?;
                        }
                    }
                }
            }
            if tv_weight > 0.0 {
                state.z = tv_step(&state.z, tv_weight)?;
            }
            state.elapsed += start.elapsed().as_secs_f64();
            state.iteration += 1;

            let diverged = divergence(&state, probe_norm0);
            let metrics = match (truth, &diverged) {
                (Some(t), None) => Some(ImageMetrics::compute(&pattern.extract_object(&state.z)?, t)?),
                _ => None,
            };
            let objective = if diverged.is_none() && cfg.trace_objective { objective_value(&state, pattern, ms)? } else { f64::NAN };
            trace.push(TraceRow { iteration: state.iteration, stage, wall_s: state.elapsed, objective, metrics })?;

            let done = converged(&state.z, &prev, tol)?;
            state.prev_z = Some(prev);
            if let Some(msg) = diverged {
                status = SolveStatus::Diverged(msg);
                break 'stages;
            }
            if done {
                if stage == Stage::Fft {
                    status = SolveStatus::Converged;
                }
                break;
            }
        }
    }
    Ok(SolveOutcome { state, trace, status, warm_start })
}

fn stage_plan(ms: &MeasurementSet, pattern: &ScanPattern, cfg: &SolverConfig) -> Result<PftPlan2D> {
    let crops = ms.crops.as_ref().ok_or_else(|| Error::InvalidState("warm-start stage needs cropped measurements".into()))?;
    let m = cfg.pft.half_width;
    if crops.half_widths != (m, m) {
        return invalid(format!("crops have half-widths {:?}, configuration asks for {m}", crops.half_widths));
    }
    let (f1, f2) = pattern.frame_shape();
    pft_plan_2d(f1, f2, m, m, cfg.pft.p, cfg.pft.p, cfg.pft.eps)
}

fn divergence(state: &ReconState, probe_norm0: f64) -> Option<String> {
    if !state.z.is_finite() || !state.probe.is_finite() {
        return Some(format!("non-finite iterate after sweep {}", state.iteration));
    }
    let growth = state.probe.norm() / probe_norm0;
    if growth > DIVERGENCE_FACTOR {
        return Some(format!("probe norm grew {growth:.3e}-fold by sweep {}", state.iteration));
    }
    None
}
