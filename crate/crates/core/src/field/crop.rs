use num_complex::Complex64;

use super::Field;
use crate::error::{invalid, Result};

fn check_crop(n1: usize, n2: usize, m1: usize, m2: usize) -> Result<()> {
    if m1 == 0 || m2 == 0 || 2 * m1 > n1 || 2 * m2 > n2 {
        return invalid(format!(
            "centered crop of half-widths ({m1},{m2}) does not fit a {n1}x{n2} spectrum"
        ));
    }
    Ok(())
}

/// Selects the `2m1 × 2m2` block of frequencies `t ∈ [-m, m-1]` from an
/// unshifted spectrum, DC landing at output index `(m1, m2)`.
pub fn crop_centered<T: Copy>(spectrum: &Field<T>, m1: usize, m2: usize) -> Result<Field<T>> {
    let (n1, n2) = spectrum.shape();
    check_crop(n1, n2, m1, m2)?;
    Ok(Field::from_fn(2 * m1, 2 * m2, |a, b| {
        spectrum[((a + n1 - m1) % n1, (b + n2 - m2) % n2)]
    }))
}

/// Adjoint of [`crop_centered`]: scatters a centered block back into a zero
/// `n1 × n2` unshifted spectrum.
pub fn uncrop_centered(cropped: &Field<Complex64>, n1: usize, n2: usize) -> Result<Field<Complex64>> {
    let (r, c) = cropped.shape();
    if r % 2 != 0 || c % 2 != 0 {
        return invalid(format!("centered block must have even shape, got {r}x{c}"));
    }
    let (m1, m2) = (r / 2, c / 2);
    check_crop(n1, n2, m1, m2)?;
    let mut out = Field::zeros(n1, n2);
    for a in 0..r {
        for b in 0..c {
            out[((a + n1 - m1) % n1, (b + n2 - m2) % n2)] = cropped[(a, b)];
        }
    }
    Ok(out)
}
