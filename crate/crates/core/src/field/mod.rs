//! Dense row-major 2D containers and the transforms every other module
//! builds on.
//!
//! Vectors are stored as `n × 1` fields. All transforms follow the same
//! convention: the forward DFT carries no normalization and the inverse
//! carries `1/n`, so `ifft(fft(z)) == z`.

mod crop;
mod dft;
pub mod raw;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{invalid, Result};

pub use crop::{crop_centered, uncrop_centered};
pub use dft::{fast_fft, fast_fft2, fast_ifft, fast_ifft2, naive_dft, naive_dft2};
pub(crate) use dft::{fft2_in_place, fft2_row_support, fft2_rows_wanted, fft_plan, Direction};

/// A dense `rows × cols` array stored in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ComplexField = Field<Complex64>;
pub type RealField = Field<f64>;

impl<T: Copy> Field<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!(
                "data length {} does not match shape {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    /// A column vector (`n × 1`).
    pub fn vector(data: Vec<T>) -> Self {
        Self { rows: data.len(), cols: 1, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Field<U> {
        Field { rows: self.rows, cols: self.cols, data: self.data.iter().copied().map(f).collect() }
    }

    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Field<U>, mut f: impl FnMut(T, U) -> V) -> Result<Field<V>> {
        self.require_shape(other.shape())?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { rows: self.rows, cols: self.cols, data })
    }

    /// Copies the `rows × cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Self> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return invalid(format!(
                "block ({r0},{c0})+{rows}x{cols} exceeds {}x{}",
                self.rows, self.cols
            ));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in r0..r0 + rows {
            let start = r * self.cols + c0;
            data.extend_from_slice(&self.data[start..start + cols]);
        }
        Ok(Self { rows, cols, data })
    }

    /// Writes `src` into this field with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) -> Result<()> {
        if r0 + src.rows > self.rows || c0 + src.cols > self.cols {
            return invalid(format!(
                "block ({r0},{c0})+{}x{} exceeds {}x{}",
                src.rows, src.cols, self.rows, self.cols
            ));
        }
        for r in 0..src.rows {
            let start = (r0 + r) * self.cols + c0;
            self.data[start..start + src.cols].copy_from_slice(src.row(r));
        }
        Ok(())
    }

    pub fn require_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            return invalid(format!(
                "shape mismatch: expected {}x{}, got {}x{}",
                shape.0, shape.1, self.rows, self.cols
            ));
        }
        Ok(())
    }
}

impl<T: Copy + Zero> Field<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }
}

impl<T> Index<(usize, usize)> for Field<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Field<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl ComplexField {
    pub fn from_polar(magnitude: &RealField, phase: &RealField) -> Result<Self> {
        magnitude.zip_map(phase, Complex64::from_polar)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn abs(&self) -> RealField {
        self.map(|z| z.norm())
    }

    /// Elementwise argument in `[-π, π]`.
    pub fn arg(&self) -> RealField {
        self.map(|z| z.arg())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_shape(other.shape())?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `⟨self, other⟩ = Σ conj(self) · other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.require_shape(other.shape())?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(|x| Complex64::new(x, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }
}
