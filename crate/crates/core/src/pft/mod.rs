//! Partial Fourier transform: the `2m̃ × 2m̃` low-frequency block of a DFT
//! computed in `O(n·r)` instead of `O(n log n)`.
//!
//! With `n = p·q` and `z` reshaped to `Z[k, l] = z[q·k + l]`,
//!
//! ```text
//! ẑ[t] = e^{-πit/p} Σ_k e^{-2πitk/p} Σ_l Z[k, l] e^{πi·x},   x = (t/p)(1 - 2l/q)
//! ```
//!
//! and `|x| ≤ m̃/p` for `|t| ≤ m̃`. Replacing `e^{πix}` by an `r`-term
//! polynomial `Σ_j w_j x^j` separates `t` from `l`:
//! `ẑ[t] ≈ Σ_j W[t, j] · FFT_p(Z·B)[t mod p, j]` with
//! `B[l, j] = w_j (1 - 2l/q)^j` and `W[t, j] = (t/p)^j e^{-πit/p}`.
//!
//! Internally `B` is split into the real powers `V[l, j] = (1 - 2l/q)^j`
//! and the coefficients `w_j`, which are folded into `W`; the large
//! contractions are then real-by-complex products.

mod gemm;
mod io;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{fft2_in_place, fft_plan, ComplexField, Direction};
use crate::minimax::{min_degree, ScopeTable};
use gemm::{complex_times_real, real_times_complex, Strides};

pub use io::{load_plan_1d, load_plan_2d, read_plan_1d, read_plan_2d, save_plan_1d, save_plan_2d, write_plan_1d, write_plan_2d};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Offline data for one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PftAxis {
    n: usize,
    p: usize,
    q: usize,
    r: usize,
    m: usize,
    eps: f64,
    coeffs: Vec<Complex64>,
    b: ComplexField,
    w: ComplexField,
    /// `V[l, j] = (1 - 2l/q)^j`, row-major `q × r`.
    v: Vec<f64>,
    /// `w_j · W[t, j]`, row-major `(2m̃+1) × r`.
    wf: Vec<Complex64>,
}

impl PftAxis {
    fn new(n: usize, m: usize, p: usize, eps: f64) -> Result<Self> {
        check_axis(n, m, p)?;
        if !ScopeTable::builtin().has_tolerance(eps) {
            return invalid(format!("tolerance {eps:e} is not in the scope table"));
        }
        let r = min_degree(eps, m as f64 / p as f64)?;
        let rec = ScopeTable::builtin().get(eps, r).expect("min_degree returned an untabulated r");
        Ok(Self::from_coeffs(n, m, p, eps, rec.coeffs.clone()))
    }

    fn from_coeffs(n: usize, m: usize, p: usize, eps: f64, coeffs: Vec<Complex64>) -> Self {
        let q = n / p;
        let r = coeffs.len();
        let v: Vec<f64> = (0..q)
            .flat_map(|l| {
                let x = 1.0 - 2.0 * l as f64 / q as f64;
                (0..r).map(move |j| x.powi(j as i32))
            })
            .collect();
        let b = ComplexField::from_fn(q, r, |l, j| coeffs[j] * v[l * r + j]);
        let w = ComplexField::from_fn(2 * m + 1, r, |a, j| {
            let t = a as f64 - m as f64;
            let y = t / p as f64;
            Complex64::from_polar(y.powi(j as i32), -std::f64::consts::PI * y)
        });
        let wf = w.data().iter().enumerate().map(|(i, x)| x * coeffs[i % r]).collect();
        Self { n, p, q, r, m, eps, coeffs, b, w, v, wf }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn r(&self) -> usize {
        self.r
    }
    /// Half-width `m̃` of the computed band.
    pub fn half_width(&self) -> usize {
        self.m
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    /// Polynomial coefficients `w_j` of `e^{πix}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    /// `q × r` matrix `B[l, j] = w_j (1 - 2l/q)^j`.
    pub fn b(&self) -> &ComplexField {
        &self.b
    }
    /// `(2m̃+1) × r` matrix `W[t + m̃, j] = (t/p)^j e^{-πit/p}`.
    pub fn w(&self) -> &ComplexField {
        &self.w
    }

    /// Residue of band index `a` (frequency `a - m̃`) modulo `p`.
    fn residue(&self, a: usize) -> usize {
        (a as i64 - self.m as i64).rem_euclid(self.p as i64) as usize
    }
}

fn check_axis(n: usize, m: usize, p: usize) -> Result<()> {
    if p < 2 || n % p != 0 {
        return invalid(format!("block count p = {p} must be at least 2 and divide n = {n}"));
    }
    if n / p < 2 {
        return invalid(format!("n / p must be at least 2, got n = {n}, p = {p}"));
    }
    if m < 1 || 2 * m > n {
        return invalid(format!("half-width {m} must satisfy 1 <= m and 2m <= n = {n}"));
    }
    Ok(())
}

/// One-dimensional plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PftPlan1D {
    axis: PftAxis,
}

/// Two-dimensional plan. The coupling tensor `W` is the outer product of the
/// per-axis `W` matrices and is stored in that factored form.
#[derive(Clone, Debug, PartialEq)]
pub struct PftPlan2D {
    axes: [PftAxis; 2],
}

pub fn pft_plan_1d(n: usize, m: usize, p: usize, eps: f64) -> Result<PftPlan1D> {
    Ok(PftPlan1D { axis: PftAxis::new(n, m, p, eps)? })
}

pub fn pft_plan_2d(n1: usize, n2: usize, m1: usize, m2: usize, p1: usize, p2: usize, eps: f64) -> Result<PftPlan2D> {
    Ok(PftPlan2D { axes: [PftAxis::new(n1, m1, p1, eps)?, PftAxis::new(n2, m2, p2, eps)?] })
}

pub fn pft_apply_1d(plan: &PftPlan1D, z: &ComplexField) -> Result<ComplexField> {
    plan.apply(z)
}

pub fn pft_apply_2d(plan: &PftPlan2D, z: &ComplexField) -> Result<ComplexField> {
    plan.apply(z)
}

pub fn pft_adjoint_2d(plan: &PftPlan2D, y: &ComplexField) -> Result<ComplexField> {
    plan.adjoint(y)
}

impl PftPlan1D {
    pub fn axis(&self) -> &PftAxis {
        &self.axis
    }

    /// The `2m̃+1` coefficients `ẑ[-m̃ ..= m̃]`, DC at index `m̃`, as a column.
    pub fn apply(&self, z: &ComplexField) -> Result<ComplexField> {
        let ax = &self.axis;
        if z.len() != ax.n || (z.rows() != 1 && z.cols() != 1) {
            return invalid(format!("expected a vector of length {}, got {:?}", ax.n, z.shape()));
        }
        let (p, q, r) = (ax.p, ax.q, ax.r);
        let mut c = vec![ZERO; p * r];
        complex_times_real((p, q, r), z.data(), Strides::row_major(q), &ax.v, Strides::row_major(r), &mut c);
        // columns of C become contiguous rows, one length-p FFT each
        let mut ct = vec![ZERO; p * r];
        transpose::transpose(&c, &mut ct, r, p);
        let fft = fft_plan(p, Direction::Forward);
        fft.process(&mut ct);
        let out = (0..2 * ax.m + 1)
            .map(|a| {
                let s = ax.residue(a);
                (0..r).map(|j| ax.wf[a * r + j] * ct[j * p + s]).sum()
            })
            .collect();
        Ok(ComplexField::vector(out))
    }
}

impl PftPlan2D {
    pub fn axes(&self) -> &[PftAxis; 2] {
        &self.axes
    }

    pub fn input_shape(&self) -> (usize, usize) {
        (self.axes[0].n, self.axes[1].n)
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (2 * self.axes[0].m, 2 * self.axes[1].m)
    }

    /// Entry `W[t1, t2, j1, j2]` of the coupling tensor, for `|tν| ≤ m̃ν`.
    pub fn w_entry(&self, t1: i64, t2: i64, j1: usize, j2: usize) -> Complex64 {
        let [a1, a2] = &self.axes;
        let i1 = (t1 + a1.m as i64) as usize;
        let i2 = (t2 + a2.m as i64) as usize;
        a1.w[(i1, j1)] * a2.w[(i2, j2)]
    }

    /// Low-frequency block `crop_centered(fft2(z), m̃1, m̃2)`, approximated.
    pub fn apply(&self, z: &ComplexField) -> Result<ComplexField> {
        z.require_shape(self.input_shape())?;
        let [a1, a2] = &self.axes;
        let full = self.forward(z.data());
        let (w1, w2) = (2 * a1.m + 1, 2 * a2.m + 1);
        // drop the +m̃ edge on both axes
        Ok(ComplexField::from_fn(w1 - 1, w2 - 1, |i, j| full[i * w2 + j]))
    }

    /// Exact adjoint of [`PftPlan2D::apply`].
    pub fn adjoint(&self, y: &ComplexField) -> Result<ComplexField> {
        y.require_shape(self.output_shape())?;
        let (n1, n2) = self.input_shape();
        ComplexField::from_vec(n1, n2, self.backward(y.data()))
    }

    /// Full `(2m̃1+1) × (2m̃2+1)` band.
    fn forward(&self, z: &[Complex64]) -> Vec<Complex64> {
        let [a1, a2] = &self.axes;
        let (n1, p1, q1, r1) = (a1.n, a1.p, a1.q, a1.r);
        let (p2, q2, r2) = (a2.p, a2.q, a2.r);
        let row = p2 * r2;

        // contract l2: rows are (i1, k2), columns l2
        let mut t = vec![ZERO; n1 * row];
        complex_times_real((n1 * p2, q2, r2), z, Strides::row_major(q2), &a2.v, Strides::row_major(r2), &mut t);

        // contract l1 per k1: [k1][l1][k2][j2] -> [k1][j1][k2][j2]
        let mut u = vec![ZERO; p1 * r1 * row];
        let v1t = Strides::row_major(r1).transposed();
        for k1 in 0..p1 {
            real_times_complex(
                (r1, q1, row),
                &a1.v,
                v1t,
                &t[k1 * q1 * row..(k1 + 1) * q1 * row],
                &mut u[k1 * r1 * row..(k1 + 1) * r1 * row],
            );
        }
        drop(t);

        let g = self.small_ffts(gather(&u, p1, r1, p2, r2), Direction::Forward);
        self.band(&g)
    }

    fn backward(&self, y: &[Complex64]) -> Vec<Complex64> {
        let [a1, a2] = &self.axes;
        let (n1, p1, q1, r1) = (a1.n, a1.p, a1.q, a1.r);
        let (p2, q2, r2) = (a2.p, a2.q, a2.r);
        let row = p2 * r2;

        let g = self.small_ffts(self.band_adjoint(y), Direction::Inverse);
        let u = scatter(&g, p1, r1, p2, r2);

        let mut t = vec![ZERO; n1 * row];
        for k1 in 0..p1 {
            real_times_complex(
                (q1, r1, row),
                &a1.v,
                Strides::row_major(r1),
                &u[k1 * r1 * row..(k1 + 1) * r1 * row],
                &mut t[k1 * q1 * row..(k1 + 1) * q1 * row],
            );
        }
        drop(u);

        let mut z = vec![ZERO; n1 * a2.n];
        complex_times_real((n1 * p2, r2, q2), &t, Strides::row_major(r2), &a2.v, Strides::row_major(r2).transposed(), &mut z);
        z
    }

    /// Unnormalized `p1 × p2` transforms of each `(j1, j2)` block.
    fn small_ffts(&self, mut g: Vec<Complex64>, dir: Direction) -> Vec<Complex64> {
        let (p1, p2) = (self.axes[0].p, self.axes[1].p);
        for block in g.chunks_exact_mut(p1 * p2) {
            fft2_in_place(block, p1, p2, dir);
        }
        g
    }

    /// `out[a1, a2] = Σ_{j1, j2} wf1[a1, j1] wf2[a2, j2] G[j1, j2, a1 mod p1, a2 mod p2]`.
    fn band(&self, g: &[Complex64]) -> Vec<Complex64> {
        let [a1, a2] = &self.axes;
        let (p1, r1, p2, r2) = (a1.p, a1.r, a2.p, a2.r);
        let (w1, w2) = (2 * a1.m + 1, 2 * a2.m + 1);
        let res2: Vec<usize> = (0..w2).map(|b| a2.residue(b)).collect();
        // h[j1][s1][b]
        let mut h = vec![ZERO; r1 * p1 * w2];
        for j1 in 0..r1 {
            for j2 in 0..r2 {
                let blk = &g[(j1 * r2 + j2) * p1 * p2..][..p1 * p2];
                for s1 in 0..p1 {
                    let dst = &mut h[(j1 * p1 + s1) * w2..][..w2];
                    let src = &blk[s1 * p2..][..p2];
                    for (b, d) in dst.iter_mut().enumerate() {
                        *d += a2.wf[b * r2 + j2] * src[res2[b]];
                    }
                }
            }
        }
        let mut out = vec![ZERO; w1 * w2];
        for a in 0..w1 {
            let s1 = a1.residue(a);
            let dst = &mut out[a * w2..][..w2];
            for j1 in 0..r1 {
                let c = a1.wf[a * r1 + j1];
                let src = &h[(j1 * p1 + s1) * w2..][..w2];
                for (d, x) in dst.iter_mut().zip(src) {
                    *d += c * x;
                }
            }
        }
        out
    }

    /// Adjoint of [`band`](Self::band) restricted to the returned `2m̃1 × 2m̃2` block.
    fn band_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let [a1, a2] = &self.axes;
        let (p1, r1, p2, r2) = (a1.p, a1.r, a2.p, a2.r);
        let (w1, w2) = (2 * a1.m, 2 * a2.m);
        let mut h = vec![ZERO; r1 * p1 * w2];
        for a in 0..w1 {
            let s1 = a1.residue(a);
            let src = &y[a * w2..][..w2];
            for j1 in 0..r1 {
                let c = a1.wf[a * r1 + j1].conj();
                let dst = &mut h[(j1 * p1 + s1) * w2..][..w2];
                for (d, x) in dst.iter_mut().zip(src) {
                    *d += c * x;
                }
            }
        }
        let res2: Vec<usize> = (0..w2).map(|b| a2.residue(b)).collect();
        let mut g = vec![ZERO; r1 * r2 * p1 * p2];
        for j1 in 0..r1 {
            for j2 in 0..r2 {
                let blk = &mut g[(j1 * r2 + j2) * p1 * p2..][..p1 * p2];
                for s1 in 0..p1 {
                    let src = &h[(j1 * p1 + s1) * w2..][..w2];
                    let dst = &mut blk[s1 * p2..][..p2];
                    for (b, x) in src.iter().enumerate() {
                        dst[res2[b]] += a2.wf[b * r2 + j2].conj() * x;
                    }
                }
            }
        }
        g
    }
}

/// `[k1][j1][k2][j2] -> [j1][j2][k1][k2]`.
fn gather(u: &[Complex64], p1: usize, r1: usize, p2: usize, r2: usize) -> Vec<Complex64> {
    let mut g = vec![ZERO; u.len()];
    for k1 in 0..p1 {
        for j1 in 0..r1 {
            for k2 in 0..p2 {
                let src = &u[((k1 * r1 + j1) * p2 + k2) * r2..][..r2];
                for (j2, x) in src.iter().enumerate() {
                    g[((j1 * r2 + j2) * p1 + k1) * p2 + k2] = *x;
                }
            }
        }
    }
    g
}

/// Inverse of [`gather`].
fn scatter(g: &[Complex64], p1: usize, r1: usize, p2: usize, r2: usize) -> Vec<Complex64> {
    let mut u = vec![ZERO; g.len()];
    for k1 in 0..p1 {
        for j1 in 0..r1 {
            for k2 in 0..p2 {
                let dst = &mut u[((k1 * r1 + j1) * p2 + k2) * r2..][..r2];
                for (j2, x) in dst.iter_mut().enumerate() {
                    *x = g[((j1 * r2 + j2) * p1 + k1) * p2 + k2];
                }
            }
        }
    }
    u
}
