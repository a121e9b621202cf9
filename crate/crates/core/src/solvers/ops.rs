//! Single-probe updates, regularisation and the objective.

use num_complex::Complex64;

use super::ReconState;
use crate::error::{invalid, Error, Result};
use crate::field::{fast_fft2, fast_ifft2, fft2_row_support, fft2_rows_wanted, ComplexField, Direction, RealField};
use crate::pft::PftPlan2D;
use crate::ptycho::{MeasurementSet, ScanPattern};

/// Smoothing parameter of the total-variation term.
pub const TV_DELTA: f64 = 1e-6;

fn unit_phase(c: Complex64) -> Complex64 {
    let r = c.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        c / r
    }
}

/// `F⁻¹(d ⊙ exp(i·arg(F x)))`, with `arg 0 = 0`.
pub fn project_modulus(x: &ComplexField, d: &RealField) -> Result<ComplexField> {
    x.require_shape(d.shape())?;
    let spec = fast_fft2(x)?;
    let target = spec.zip_map(d, |s, a| a * unit_phase(s))?;
    fast_ifft2(&target)
}

fn check_probe_index(pattern: &ScanPattern, ms: &MeasurementSet, j: usize) -> Result<()> {
    if pattern.len() != ms.len() {
        return invalid(format!("{} windows but {} measurements", pattern.len(), ms.len()));
    }
    if j >= pattern.len() {
        return invalid(format!("probe index {j} out of range 0..{}", pattern.len()));
    }
    Ok(())
}

/// Frame-sized spectrum of the exit wave of window `j`.
fn exit_spectrum(state: &ReconState, pattern: &ScanPattern, j: usize) -> Vec<Complex64> {
    let (f1, f2) = pattern.frame_shape();
    let (r0, c0) = pattern.offsets()[j];
    let (wr, wc) = pattern.window_shape();
    let mut buf = vec![Complex64::new(0.0, 0.0); f1 * f2];
    for i in 0..wr {
        for k in 0..wc {
            if pattern.mask_contains(i, k) {
                buf[(r0 + i) * f2 + c0 + k] = state.probe[(i, k)] * state.z[(r0 + i, c0 + k)];
            }
        }
    }
    fft2_row_support(&mut buf, f1, f2, r0..r0 + wr, Direction::Forward);
    buf
}

fn check_measurement(pattern: &ScanPattern, ms: &MeasurementSet, j: usize) -> Result<()> {
    check_probe_index(pattern, ms, j)?;
    ms.amplitudes[j].require_shape(pattern.frame_shape())
}

/// `F x − d ⊙ exp(i·arg(F x))` in place, which is `F(x − P(x))`.
fn subtract_projection(spec: &mut [Complex64], d: &RealField) {
    for (s, a) in spec.iter_mut().zip(d.data()) {
        *s -= a * unit_phase(*s);
    }
}

/// `x − P(x)` restricted to window `j`, row-major `wr × wc`.
fn fft_residual(state: &ReconState, pattern: &ScanPattern, ms: &MeasurementSet, j: usize) -> Result<Vec<Complex64>> {
    check_measurement(pattern, ms, j)?;
    let (f1, f2) = pattern.frame_shape();
    let (r0, c0) = pattern.offsets()[j];
    let (wr, wc) = pattern.window_shape();
    let mut buf = exit_spectrum(state, pattern, j);
    subtract_projection(&mut buf, &ms.amplitudes[j]);
    fft2_rows_wanted(&mut buf, f1, f2, r0..r0 + wr, Direction::Inverse);
    let scale = 1.0 / (f1 * f2) as f64;
    Ok((0..wr).flat_map(|i| (0..wc).map(move |k| (i, k))).map(|(i, k)| buf[(r0 + i) * f2 + c0 + k] * scale).collect())
}

/// `A*(A x − d_crop ⊙ exp(i·arg(A x)))` restricted to window `j`, with `A` the partial transform.
fn pft_residual(
    state: &ReconState,
    pattern: &ScanPattern,
    ms: &MeasurementSet,
    j: usize,
    plan: &PftPlan2D,
) -> Result<Vec<Complex64>> {
    check_probe_index(pattern, ms, j)?;
    let crops = ms.crops.as_ref().ok_or_else(|| Error::InvalidState("partial-transform update needs cropped data".into()))?;
    if plan.input_shape() != pattern.frame_shape() || plan.output_shape() != crops.data[j].shape() {
        return invalid("transform plan does not match the frame and crop sizes");
    }
    let x = pattern.exit_wave(&state.z, &state.probe, j)?;
    let ax = plan.apply(&x)?;
    let r = ax.zip_map(&crops.data[j], |s, a| s - a * unit_phase(s))?;
    let g = plan.adjoint(&r)?;
    let (r0, c0) = pattern.offsets()[j];
    let (wr, wc) = pattern.window_shape();
    Ok((0..wr).flat_map(|i| (0..wc).map(move |k| (i, k))).map(|(i, k)| g[(r0 + i, c0 + k)]).collect())
}

/// `z ← z − step·conj(ω)·g` on the illuminated pixels of window `j`.
fn update_object(state: &mut ReconState, pattern: &ScanPattern, j: usize, g: &[Complex64], step: f64) {
    let (r0, c0) = pattern.offsets()[j];
    let (wr, wc) = pattern.window_shape();
    for i in 0..wr {
        for k in 0..wc {
            if pattern.mask_contains(i, k) {
                state.z[(r0 + i, c0 + k)] -= step * state.probe[(i, k)].conj() * g[i * wc + k];
            }
        }
    }
}

/// `ω ← ω − step·conj(z_j)·g` on the illuminated pixels of window `j`.
fn update_probe(state: &mut ReconState, pattern: &ScanPattern, j: usize, g: &[Complex64], step: f64) {
    let (r0, c0) = pattern.offsets()[j];
    let (wr, wc) = pattern.window_shape();
    for i in 0..wr {
        for k in 0..wc {
            if pattern.mask_contains(i, k) {
                state.probe[(i, k)] -= step * state.z[(r0 + i, c0 + k)].conj() * g[i * wc + k];
            }
        }
    }
}

fn require_blind(state: &ReconState) -> Result<()> {
    if !state.blind {
        return Err(Error::InvalidState("probe updates need a blind reconstruction".into()));
    }
    Ok(())
}

pub fn pie_object_update(state: &mut ReconState, pattern: &ScanPattern, ms: &MeasurementSet, j: usize, beta: f64) -> Result<()> {
    let g = fft_residual(state, pattern, ms, j)?;
    update_object(state, pattern, j, &g, beta);
    Ok(())
}

/// Uses the current (already updated) object, so call it after the object step.
pub fn epie_probe_update(state: &mut ReconState, pattern: &ScanPattern, ms: &MeasurementSet, j: usize, gamma: f64) -> Result<()> {
    require_blind(state)?;
    let g = fft_residual(state, pattern, ms, j)?;
    update_probe(state, pattern, j, &g, gamma);
    Ok(())
}

pub fn pft_object_update(
    state: &mut ReconState,
    pattern: &ScanPattern,
    ms: &MeasurementSet,
    j: usize,
    beta_pft: f64,
    plan: &PftPlan2D,
) -> Result<()> {
    let g = pft_residual(state, pattern, ms, j, plan)?;
    update_object(state, pattern, j, &g, beta_pft);
    Ok(())
}

pub fn pft_probe_update(
    state: &mut ReconState,
    pattern: &ScanPattern,
    ms: &MeasurementSet,
    j: usize,
    gamma_pft: f64,
    plan: &PftPlan2D,
) -> Result<()> {
    require_blind(state)?;
    let g = pft_residual(state, pattern, ms, j, plan)?;
    update_probe(state, pattern, j, &g, gamma_pft);
    Ok(())
}

/// Forward differences with a zero last difference along each axis.
fn gradients(u: &RealField) -> (Vec<f64>, Vec<f64>) {
    let (r, c) = u.shape();
    let mut gx = vec![0.0; r * c];
    let mut gy = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                gx[i * c + j] = u[(i, j + 1)] - u[(i, j)];
            }
            if i + 1 < r {
                gy[i * c + j] = u[(i + 1, j)] - u[(i, j)];
            }
        }
    }
    (gx, gy)
}

/// Smoothed isotropic total variation `Σ √(|∇u|² + δ²)`.
pub fn tv_value(u: &RealField) -> f64 {
    let (gx, gy) = gradients(u);
    gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b + TV_DELTA * TV_DELTA).sqrt()).sum()
}

/// One explicit descent step on the smoothed TV of `u`.
fn tv_descent(u: &RealField, weight: f64) -> RealField {
    let (r, c) = u.shape();
    let (gx, gy) = gradients(u);
    let norm: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b + TV_DELTA * TV_DELTA).sqrt()).collect();
    let px: Vec<f64> = gx.iter().zip(&norm).map(|(g, n)| g / n).collect();
    let py: Vec<f64> = gy.iter().zip(&norm).map(|(g, n)| g / n).collect();
    RealField::from_fn(r, c, |i, j| {
        let k = i * c + j;
        let mut div = px[k] + py[k];
        if j > 0 {
            div -= px[k - 1];
        }
        if i > 0 {
            div -= py[k - c];
        }
        u[(i, j)] + weight * div
    })
}

/// TV step applied separately to the magnitude and phase of `z`.
pub fn tv_step(z: &ComplexField, weight: f64) -> Result<ComplexField> {
    if !(weight >= 0.0) {
        return invalid(format!("TV weight must be nonnegative, got {weight}"));
    }
    if weight == 0.0 {
        return Ok(z.clone());
    }
    let mag = tv_descent(&z.abs(), weight).map(|m| m.max(0.0));
    let phase = tv_descent(&z.arg(), weight);
    ComplexField::from_polar(&mag, &phase)
}

/// `(1/N) Σ_j ‖ω ⊙ Q_j z − P_j(z)‖²`, evaluated in the Fourier domain.
pub fn objective_value(state: &ReconState, pattern: &ScanPattern, ms: &MeasurementSet) -> Result<f64> {
    if ms.is_empty() {
        return invalid("no measurements");
    }
    let (f1, f2) = pattern.frame_shape();
    let mut total = 0.0;
    for j in 0..ms.len() {
        check_measurement(pattern, ms, j)?;
        let mut spec = exit_spectrum(state, pattern, j);
        subtract_projection(&mut spec, &ms.amplitudes[j]);
        total += spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / (f1 * f2) as f64;
    }
    Ok(total / ms.len() as f64)
}

/// `‖z_new − z_old‖ / ‖z_old‖ ≤ tol`. A zero `z_old` never counts as converged.
pub fn converged(z_new: &ComplexField, z_old: &ComplexField, tol: f64) -> Result<bool> {
    let den = z_old.norm();
    if den == 0.0 {
        log::warn!("convergence test against an all-zero iterate; treating as not converged");
        return Ok(false);
    }
    let num = z_new.zip_map(z_old, |a, b| a - b)?.norm();
    Ok(num / den <= tol)
}
