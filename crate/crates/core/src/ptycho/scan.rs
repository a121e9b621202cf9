//! Scan geometries. Windows are stored as offsets into a (possibly padded)
//! frame plus one shared mask, never as dense extraction matrices.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{ComplexField, RealField};

/// Illuminated region inside each window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mask {
    /// The whole rectangle.
    Rect,
    /// Pixels within `radius` of the centre of a `(2·radius+1)²` window.
    Disk { radius: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPattern {
    object_shape: (usize, usize),
    frame_shape: (usize, usize),
    object_offset: (usize, usize),
    window_shape: (usize, usize),
    mask: Mask,
    offsets: Vec<(usize, usize)>,
}

/// Rectangular windows in column-wise boustrophedon order: down the first
/// column, up the next, left to right.
pub fn grid_scan(n: usize, window: usize, shift: usize) -> Result<ScanPattern> {
    if n == 0 || window == 0 || window > n {
        return invalid(format!("window {window} must lie in 1..={n}"));
    }
    if shift == 0 || shift > window {
        return invalid(format!("shift {shift} must lie in 1..={window} so adjacent windows touch"));
    }
    if (n - window) % shift != 0 {
        let last = (n - window) / shift * shift + window;
        return invalid(format!(
            "windows of {window} shifted by {shift} cover pixels 0..{last} of {n}; rows and columns {last}..{n} are never illuminated"
        ));
    }
    let k = (n - window) / shift + 1;
    let mut offsets = Vec::with_capacity(k * k);
    for c in 0..k {
        for i in 0..k {
            let r = if c % 2 == 0 { i } else { k - 1 - i };
            offsets.push((r * shift, c * shift));
        }
    }
    Ok(ScanPattern {
        object_shape: (n, n),
        frame_shape: (n, n),
        object_offset: (0, 0),
        window_shape: (window, window),
        mask: Mask::Rect,
        offsets,
    })
}

/// Disk windows on a `k × k` raster with `k = ⌈n / shift⌉`, row by row,
/// alternating direction. The object sits centred in a zero-padded frame
/// large enough to hold every window.
pub fn circular_scan(n: usize, radius: usize, shift: usize) -> Result<ScanPattern> {
    if n == 0 || radius == 0 || shift == 0 {
        return invalid("object size, radius and shift must be positive");
    }
    let k = n.div_ceil(shift);
    let window = 2 * radius + 1;
    let span = (k - 1) * shift + window;
    let frame = span.max(n);
    let raster = (frame - span) / 2;
    let obj = (frame - n) / 2;
    let mut offsets = Vec::with_capacity(k * k);
    for r in 0..k {
        for i in 0..k {
            let c = if r % 2 == 0 { i } else { k - 1 - i };
            offsets.push((raster + r * shift, raster + c * shift));
        }
    }
    let pattern = ScanPattern {
        object_shape: (n, n),
        frame_shape: (frame, frame),
        object_offset: (obj, obj),
        window_shape: (window, window),
        mask: Mask::Disk { radius },
        offsets,
    };
    let uncovered = pattern.uncovered_object_pixels();
    if uncovered > 0 {
        return invalid(format!(
            "{k}x{k} raster of radius-{radius} disks shifted by {shift} leaves {uncovered} of {} object pixels unilluminated",
            n * n
        ));
    }
    Ok(pattern)
}

impl ScanPattern {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn object_shape(&self) -> (usize, usize) {
        self.object_shape
    }

    /// Shape of the padded reconstruction frame and of every measurement.
    pub fn frame_shape(&self) -> (usize, usize) {
        self.frame_shape
    }

    /// Top-left corner of the object inside the frame.
    pub fn object_offset(&self) -> (usize, usize) {
        self.object_offset
    }

    pub fn window_shape(&self) -> (usize, usize) {
        self.window_shape
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    /// Top-left corners of the windows in scan order, frame coordinates.
    pub fn offsets(&self) -> &[(usize, usize)] {
        &self.offsets
    }

    pub fn mask_contains(&self, i: usize, j: usize) -> bool {
        match self.mask {
            Mask::Rect => i < self.window_shape.0 && j < self.window_shape.1,
            Mask::Disk { radius } => {
                let (di, dj) = (i as i64 - radius as i64, j as i64 - radius as i64);
                di * di + dj * dj <= (radius * radius) as i64
            }
        }
    }

    pub fn mask_field(&self) -> RealField {
        let (r, c) = self.window_shape;
        RealField::from_fn(r, c, |i, j| if self.mask_contains(i, j) { 1.0 } else { 0.0 })
    }

    /// Grows the frame symmetrically so both sides are multiples of `p`.
    pub fn pad_to_multiple(mut self, p: usize) -> Result<Self> {
        if p == 0 {
            return invalid("padding multiple must be positive");
        }
        let (f1, f2) = self.frame_shape;
        let (g1, g2) = (f1.div_ceil(p) * p, f2.div_ceil(p) * p);
        let (d1, d2) = ((g1 - f1) / 2, (g2 - f2) / 2);
        self.frame_shape = (g1, g2);
        self.object_offset = (self.object_offset.0 + d1, self.object_offset.1 + d2);
        for o in &mut self.offsets {
            *o = (o.0 + d1, o.1 + d2);
        }
        Ok(self)
    }

    /// Zero-pads an object into the frame.
    pub fn embed_object(&self, z: &ComplexField) -> Result<ComplexField> {
        z.require_shape(self.object_shape)?;
        let mut f = ComplexField::zeros(self.frame_shape.0, self.frame_shape.1);
        f.set_block(self.object_offset.0, self.object_offset.1, z)?;
        Ok(f)
    }

    /// Object region of a frame-sized field.
    pub fn extract_object<T: Copy>(&self, frame: &crate::field::Field<T>) -> Result<crate::field::Field<T>> {
        frame.require_shape(self.frame_shape)?;
        frame.block(self.object_offset.0, self.object_offset.1, self.object_shape.0, self.object_shape.1)
    }

    /// Frame-sized exit wave `ω ⊙ mask ⊙ patch_j`, zero outside window `j`.
    pub fn exit_wave(&self, frame: &ComplexField, probe: &ComplexField, j: usize) -> Result<ComplexField> {
        frame.require_shape(self.frame_shape)?;
        probe.require_shape(self.window_shape)?;
        let (r0, c0) = self.offsets[j];
        let (wr, wc) = self.window_shape;
        let mut out = ComplexField::zeros(self.frame_shape.0, self.frame_shape.1);
        for i in 0..wr {
            for k in 0..wc {
                if self.mask_contains(i, k) {
                    out[(r0 + i, c0 + k)] = probe[(i, k)] * frame[(r0 + i, c0 + k)];
                }
            }
        }
        Ok(out)
    }

    /// Number of windows covering each frame pixel.
    pub fn coverage(&self) -> RealField {
        let mut cov = RealField::zeros(self.frame_shape.0, self.frame_shape.1);
        let (wr, wc) = self.window_shape;
        for &(r0, c0) in &self.offsets {
            for i in 0..wr {
                for k in 0..wc {
                    if self.mask_contains(i, k) {
                        cov[(r0 + i, c0 + k)] += 1.0;
                    }
                }
            }
        }
        cov
    }

    /// Object pixels outside every window. Patterns are lattices of row and
    /// column offsets, so the nearest window is found one axis at a time.
    pub fn uncovered_object_pixels(&self) -> usize {
        let mut rows: Vec<usize> = self.offsets.iter().map(|o| o.0).collect();
        let mut cols: Vec<usize> = self.offsets.iter().map(|o| o.1).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        if rows.len() * cols.len() != self.offsets.len() {
            let cov = self.coverage();
            let (o1, o2) = self.object_offset;
            return (0..self.object_shape.0)
                .flat_map(|i| (0..self.object_shape.1).map(move |j| (i, j)))
                .filter(|&(i, j)| cov[(o1 + i, o2 + j)] == 0.0)
                .count();
        }
        // per-axis distance from each object pixel to the nearest window centre
        // (disk) or 0/inf for inside/outside some window span (rect)
        let axis = |starts: &[usize], len: usize, offset: usize, count: usize| -> Vec<f64> {
            (0..count)
                .map(|i| {
                    let f = (offset + i) as f64;
                    match self.mask {
                        Mask::Disk { radius } => starts
                            .iter()
                            .map(|&s| (f - (s + radius) as f64).abs())
                            .fold(f64::INFINITY, f64::min),
                        Mask::Rect => {
                            if starts.iter().any(|&s| (s as f64) <= f && f < (s + len) as f64) {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        }
                    }
                })
                .collect()
        };
        let di = axis(&rows, self.window_shape.0, self.object_offset.0, self.object_shape.0);
        let dj = axis(&cols, self.window_shape.1, self.object_offset.1, self.object_shape.1);
        let limit = match self.mask {
            Mask::Disk { radius } => (radius * radius) as f64,
            Mask::Rect => 0.0,
        };
        di.iter().map(|a| dj.iter().filter(|b| a * a + *b * *b > limit).count()).sum()
    }

    /// Fraction of window `a`'s illuminated pixels also illuminated by window `b`.
    pub fn overlap_fraction(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.offsets[a];
        let (rb, cb) = self.offsets[b];
        let (wr, wc) = self.window_shape;
        let (mut own, mut shared) = (0usize, 0usize);
        for i in 0..wr {
            for k in 0..wc {
                if !self.mask_contains(i, k) {
                    continue;
                }
                own += 1;
                let (fi, fk) = ((ra + i) as i64 - rb as i64, (ca + k) as i64 - cb as i64);
                if fi >= 0 && fk >= 0 && self.mask_contains(fi as usize, fk as usize) {
                    shared += 1;
                }
            }
        }
        shared as f64 / own as f64
    }

    /// Illuminated pixel count of one window.
    pub fn window_pixels(&self) -> usize {
        match self.mask {
            Mask::Rect => self.window_shape.0 * self.window_shape.1,
            Mask::Disk { .. } => self.mask_field().data().iter().filter(|&&v| v > 0.0).count(),
        }
    }
}

/// Unit probe over a window.
pub fn identity_probe(shape: (usize, usize)) -> ComplexField {
    ComplexField::filled(shape.0, shape.1, Complex64::new(1.0, 0.0))
}

/// `exp(-(x² + y²) / 2σ²)` with `(x, y)` measured from the window centre.
pub fn gaussian_probe(shape: (usize, usize), sigma: f64) -> Result<ComplexField> {
    if !(sigma > 0.0) {
        return invalid(format!("probe width must be positive, got {sigma}"));
    }
    let (cr, cc) = ((shape.0 as f64 - 1.0) / 2.0, (shape.1 as f64 - 1.0) / 2.0);
    Ok(ComplexField::from_fn(shape.0, shape.1, |i, j| {
        let (y, x) = (i as f64 - cr, j as f64 - cc);
        Complex64::new((-(x * x + y * y) / (2.0 * sigma * sigma)).exp(), 0.0)
    }))
}
