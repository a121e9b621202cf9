//! Complex-by-real matrix products on interleaved `Complex64` storage.
//!
//! `Complex64` is `#[repr(C)]` `(re, im)`, so a complex matrix viewed as
//! `f64` is two real matrices with doubled strides. Each product below is
//! two real `dgemm` calls.

use matrixmultiply::dgemm;
use num_complex::Complex64;

/// Row/column strides in elements.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Strides {
    pub row: isize,
    pub col: isize,
}

impl Strides {
    pub fn row_major(cols: usize) -> Self {
        Self { row: cols as isize, col: 1 }
    }

    pub fn transposed(self) -> Self {
        Self { row: self.col, col: self.row }
    }
}

fn span(rows: usize, cols: usize, s: Strides) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    ((rows - 1) as isize * s.row + (cols - 1) as isize * s.col) as usize + 1
}

/// `out (m×n) = a (m×k complex) · b (k×n real)`; `out` is row-major contiguous.
pub(crate) fn complex_times_real(
    (m, k, n): (usize, usize, usize),
    a: &[Complex64],
    sa: Strides,
    b: &[f64],
    sb: Strides,
    out: &mut [Complex64],
) {
    assert!(span(m, k, sa) <= a.len());
    assert!(span(k, n, sb) <= b.len());
    assert!(m * n <= out.len());
    let sc = Strides::row_major(n);
    let ap = a.as_ptr() as *const f64;
    let cp = out.as_mut_ptr() as *mut f64;
    // SAFETY: the asserts above bound every index the kernels touch; the
    // complex buffers hold 2 f64 per element so offset 1 with doubled strides
    // addresses the imaginary parts.
    unsafe {
        for part in 0..2 {
            dgemm(
                m,
                k,
                n,
                1.0,
                ap.add(part),
                2 * sa.row,
                2 * sa.col,
                b.as_ptr(),
                sb.row,
                sb.col,
                0.0,
                cp.add(part),
                2 * sc.row,
                2 * sc.col,
            );
        }
    }
}

/// `out (m×n) = a (m×k real) · b (k×n complex)`; `b` and `out` row-major contiguous.
pub(crate) fn real_times_complex(
    (m, k, n): (usize, usize, usize),
    a: &[f64],
    sa: Strides,
    b: &[Complex64],
    out: &mut [Complex64],
) {
    assert!(span(m, k, sa) <= a.len());
    assert!(k * n <= b.len());
    assert!(m * n <= out.len());
    let bp = b.as_ptr() as *const f64;
    let cp = out.as_mut_ptr() as *mut f64;
    // SAFETY: as above; b and out are contiguous row-major complex matrices.
    unsafe {
        for part in 0..2 {
            dgemm(m, k, n, 1.0, a.as_ptr(), sa.row, sa.col, bp.add(part), 2 * n as isize, 2, 0.0, cp.add(part), 2 * n as isize, 2);
        }
    }
}
