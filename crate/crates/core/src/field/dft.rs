use std::f64::consts::PI;
use std::ops::Range;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use super::ComplexField;
use crate::error::{invalid, Result};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    /// Unnormalized inverse (no `1/n`).
    Inverse,
}

pub(crate) fn fft_plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap_or_else(|e| e.into_inner());
    match direction {
        Direction::Forward => planner.plan_fft_forward(len),
        Direction::Inverse => planner.plan_fft_inverse(len),
    }
}

fn check_nonempty(z: &ComplexField) -> Result<()> {
    if z.is_empty() {
        return invalid("transform of an empty field");
    }
    Ok(())
}

/// Exact `O(n²)` DFT of the field's data treated as a vector.
pub fn naive_dft(z: &ComplexField) -> Result<ComplexField> {
    check_nonempty(z)?;
    let n = z.len();
    let x = z.data();
    let out = (0..n)
        .map(|t| {
            x.iter()
                .enumerate()
                .map(|(k, &v)| {
                    // reduce tk mod n before scaling so the angle stays small
                    let phase = -2.0 * PI * ((t * k) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();
    ComplexField::from_vec(z.rows(), z.cols(), out)
}

/// Exact quadruple-sum 2D DFT.
pub fn naive_dft2(z: &ComplexField) -> Result<ComplexField> {
    check_nonempty(z)?;
    let (n1, n2) = z.shape();
    let mut out = ComplexField::zeros(n1, n2);
    for t1 in 0..n1 {
        for t2 in 0..n2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in 0..n1 {
                let a = ((t1 * k1) % n1) as f64 / n1 as f64;
                for k2 in 0..n2 {
                    let b = ((t2 * k2) % n2) as f64 / n2 as f64;
                    acc += z[(k1, k2)] * Complex64::from_polar(1.0, -2.0 * PI * (a + b));
                }
            }
            out[(t1, t2)] = acc;
        }
    }
    Ok(out)
}

fn transform_1d(z: &ComplexField, direction: Direction) -> Result<ComplexField> {
    check_nonempty(z)?;
    let mut out = z.clone();
    fft_plan(z.len(), direction).process(out.data_mut());
    if direction == Direction::Inverse {
        let s = 1.0 / z.len() as f64;
        out.data_mut().iter_mut().for_each(|v| *v *= s);
    }
    Ok(out)
}

/// Forward DFT of the field's data treated as a vector (no normalization).
pub fn fast_fft(z: &ComplexField) -> Result<ComplexField> {
    transform_1d(z, Direction::Forward)
}

/// Inverse of [`fast_fft`], carrying the `1/n` factor.
pub fn fast_ifft(z: &ComplexField) -> Result<ComplexField> {
    transform_1d(z, Direction::Inverse)
}

fn row_pass(data: &mut [Complex64], cols: usize, rows: Range<usize>, direction: Direction) {
    if cols > 1 && !rows.is_empty() {
        let plan = fft_plan(cols, direction);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(&mut data[rows.start * cols..rows.end * cols], &mut scratch);
    }
}

fn column_pass(data: &mut [Complex64], rows: usize, cols: usize, direction: Direction) {
    if rows <= 1 {
        return;
    }
    let plan = fft_plan(rows, direction);
    if cols == 1 {
        plan.process(data);
        return;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
    transpose::transpose(data, &mut buf, cols, rows);
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(&mut buf, &mut scratch);
    transpose::transpose(&buf, data, rows, cols);
}

/// In-place unnormalized 2D transform of a row-major `rows × cols` buffer.
pub(crate) fn fft2_in_place(data: &mut [Complex64], rows: usize, cols: usize, direction: Direction) {
    debug_assert_eq!(data.len(), rows * cols);
    row_pass(data, cols, 0..rows, direction);
    column_pass(data, rows, cols, direction);
}

/// 2D transform of a buffer whose rows outside `active` are zero; those
/// row transforms are skipped.
pub(crate) fn fft2_row_support(data: &mut [Complex64], rows: usize, cols: usize, active: Range<usize>, direction: Direction) {
    debug_assert_eq!(data.len(), rows * cols);
    row_pass(data, cols, active, direction);
    column_pass(data, rows, cols, direction);
}

/// 2D transform that is only correct on the rows in `wanted`; the other
/// rows receive the column transforms only.
pub(crate) fn fft2_rows_wanted(data: &mut [Complex64], rows: usize, cols: usize, wanted: Range<usize>, direction: Direction) {
    debug_assert_eq!(data.len(), rows * cols);
    column_pass(data, rows, cols, direction);
    row_pass(data, cols, wanted, direction);
}

/// Forward 2D DFT (no normalization).
pub fn fast_fft2(z: &ComplexField) -> Result<ComplexField> {
    check_nonempty(z)?;
    let mut out = z.clone();
    fft2_in_place(out.data_mut(), z.rows(), z.cols(), Direction::Forward);
    Ok(out)
}

/// Inverse 2D DFT with the `1/(rows·cols)` factor.
pub fn fast_ifft2(z: &ComplexField) -> Result<ComplexField> {
    check_nonempty(z)?;
    let mut out = z.clone();
    fft2_in_place(out.data_mut(), z.rows(), z.cols(), Direction::Inverse);
    let s = 1.0 / z.len() as f64;
    out.data_mut().iter_mut().for_each(|v| *v *= s);
    Ok(out)
}
