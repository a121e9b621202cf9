//! Real minimax fits on `u ∈ [0, 1]` in an even or odd Chebyshev basis.
//!
//! Even fits use `T_0, T_2, …`, odd fits `T_1, T_3, …`; restricting to one
//! parity turns the symmetric problem on `[-1, 1]` into an ordinary Haar
//! system on the half interval.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

const GRID: usize = 4096;
const MAX_ITERS: usize = 60;
/// Converged once the largest error is within this factor of the levelled error.
const LEVEL_TOL: f64 = 1e-6;
/// Errors below this are at the rounding floor; equioscillation is meaningless there.
const ERROR_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn degree(self, k: usize) -> usize {
        match self {
            Parity::Even => 2 * k,
            Parity::Odd => 2 * k + 1,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RealFit {
    /// Coefficients of `T_{degree(k)}`.
    pub cheb: Vec<f64>,
    pub parity: Parity,
    /// Largest error found on the refined grid.
    pub max_error: f64,
    /// Smallest reference error, a lower bound on the true minimax error.
    pub lower_bound: f64,
    pub converged: bool,
}

impl RealFit {
    pub fn eval(&self, u: f64) -> f64 {
        let degs = self.cheb.len();
        if degs == 0 {
            return 0.0;
        }
        let tv = chebyshev_values(u, self.parity.degree(degs - 1));
        self.cheb.iter().enumerate().map(|(k, c)| c * tv[self.parity.degree(k)]).sum()
    }

    /// Monomial coefficients in `u`, indexed by power.
    pub fn monomial(&self) -> Vec<f64> {
        let degs = self.cheb.len();
        if degs == 0 {
            return Vec::new();
        }
        let top = self.parity.degree(degs - 1);
        let basis = chebyshev_monomials(top);
        let mut out = vec![0.0; top + 1];
        for (k, c) in self.cheb.iter().enumerate() {
            for (j, b) in basis[self.parity.degree(k)].iter().enumerate() {
                out[j] += c * b;
            }
        }
        out
    }
}

fn chebyshev_values(u: f64, top: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(top + 1);
    t.push(1.0);
    if top >= 1 {
        t.push(u);
    }
    for k in 2..=top {
        t.push(2.0 * u * t[k - 1] - t[k - 2]);
    }
    t
}

/// Monomial expansions of `T_0 … T_top`.
fn chebyshev_monomials(top: usize) -> Vec<Vec<f64>> {
    let mut basis = vec![vec![1.0]];
    if top >= 1 {
        basis.push(vec![0.0, 1.0]);
    }
    for k in 2..=top {
        let mut next = vec![0.0; k + 1];
        for (j, c) in basis[k - 1].iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, c) in basis[k - 2].iter().enumerate() {
            next[j] -= c;
        }
        basis.push(next);
    }
    basis
}

fn initial_reference(parity: Parity, count: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = match parity {
        Parity::Even => (0..=count).map(|k| (k as f64 * PI / (2 * count) as f64).cos()).collect(),
        Parity::Odd => (0..=count).map(|k| (k as f64 * PI / (2 * count + 1) as f64).cos()).collect(),
    };
    pts.sort_by(f64::total_cmp);
    pts
}

fn solve_reference(f: &dyn Fn(f64) -> f64, parity: Parity, reference: &[f64]) -> Option<(Vec<f64>, f64)> {
    let count = reference.len() - 1;
    let top = parity.degree(count - 1);
    let mut a = DMatrix::<f64>::zeros(count + 1, count + 1);
    let mut b = DVector::<f64>::zeros(count + 1);
    for (row, &u) in reference.iter().enumerate() {
        let tv = chebyshev_values(u, top);
        for k in 0..count {
            a[(row, k)] = tv[parity.degree(k)];
        }
        a[(row, count)] = if row % 2 == 0 { 1.0 } else { -1.0 };
        b[row] = f(u);
    }
    let x = a.lu().solve(&b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((x.as_slice()[..count].to_vec(), x[count].abs()))
}

/// Golden-section search for the maximum of `|err|` on `[a, b]`.
fn refine_extremum(err: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (err(x1).abs(), err(x2).abs());
    for _ in 0..40 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = err(x1).abs();
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = err(x2).abs();
        }
    }
    (a + b) / 2.0
}

/// Local extrema of `err` on a uniform grid, refined, with their signs.
fn find_extrema(err: &dyn Fn(f64) -> f64, parity: Parity) -> Vec<(f64, f64)> {
    let h = 1.0 / GRID as f64;
    let vals: Vec<f64> = (0..=GRID).map(|i| err(i as f64 * h)).collect();
    let mut out = Vec::new();
    for i in 0..=GRID {
        let v = vals[i].abs();
        let left = if i > 0 { vals[i - 1].abs() } else { f64::NEG_INFINITY };
        let right = if i < GRID { vals[i + 1].abs() } else { f64::NEG_INFINITY };
        if v < left || v < right {
            continue;
        }
        if i == 0 && parity == Parity::Odd {
            continue;
        }
        let u = if i == 0 || i == GRID {
            i as f64 * h
        } else {
            refine_extremum(err, (i - 1) as f64 * h, (i + 1) as f64 * h)
        };
        let e = err(u);
        if e != 0.0 {
            out.push((u, e));
        }
    }
    out
}

/// Reduces extrema to an alternating sequence of exactly `need` points.
fn alternating_subset(mut ext: Vec<(f64, f64)>, need: usize) -> Option<Vec<(f64, f64)>> {
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(ext.len());
    for (u, e) in ext.drain(..) {
        match merged.last_mut() {
            Some(last) if last.1.signum() == e.signum() => {
                if e.abs() > last.1.abs() {
                    *last = (u, e);
                }
            }
            _ => merged.push((u, e)),
        }
    }
    while merged.len() > need {
        // dropping an end keeps the sequence alternating
        if merged[0].1.abs() < merged[merged.len() - 1].1.abs() {
            merged.remove(0);
        } else {
            merged.pop();
        }
    }
    (merged.len() == need).then_some(merged)
}

/// Minimax fit of `f` on `[0, 1]` by `count` basis functions of the given parity.
pub(crate) fn remez(f: &dyn Fn(f64) -> f64, parity: Parity, count: usize) -> RealFit {
    if count == 0 {
        let max_error = find_extrema(f, parity).iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        return RealFit { cheb: Vec::new(), parity, max_error, lower_bound: max_error, converged: true };
    }
    let mut reference = initial_reference(parity, count);
    let mut best: Option<RealFit> = None;
    for _ in 0..MAX_ITERS {
        let Some((cheb, level)) = solve_reference(f, parity, &reference) else { break };
        let fit = RealFit { cheb, parity, max_error: 0.0, lower_bound: level, converged: false };
        let err = |u: f64| f(u) - fit.eval(u);
        let ext = find_extrema(&err, parity);
        let max_error = ext.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let fit = RealFit { max_error, ..fit };
        let done = max_error <= level * (1.0 + LEVEL_TOL) || max_error < ERROR_FLOOR;
        if best.as_ref().map_or(true, |b| fit.max_error < b.max_error) {
            best = Some(fit.clone());
        }
        if done {
            return RealFit { converged: true, ..fit };
        }
        match alternating_subset(ext, count + 1) {
            Some(next) => reference = next.into_iter().map(|p| p.0).collect(),
            None => break,
        }
    }
    best.unwrap_or_else(|| chebyshev_interpolant(f, parity, count))
}

/// Interpolation at Chebyshev points of the matching full-interval degree.
pub(crate) fn chebyshev_interpolant(f: &dyn Fn(f64) -> f64, parity: Parity, count: usize) -> RealFit {
    let top = parity.degree(count.saturating_sub(1));
    let nodes = top + 1;
    // Chebyshev coefficients of f on [-1, 1] via the discrete cosine sum.
    let theta: Vec<f64> = (0..nodes).map(|k| PI * (k as f64 + 0.5) / nodes as f64).collect();
    let fx: Vec<f64> = theta.iter().map(|t| f(t.cos().abs()) * sign_for(parity, t.cos())).collect();
    let cheb = (0..count)
        .map(|k| {
            let d = parity.degree(k);
            let s: f64 = theta.iter().zip(&fx).map(|(t, v)| v * (d as f64 * t).cos()).sum();
            s * if d == 0 { 1.0 } else { 2.0 } / nodes as f64
        })
        .collect();
    let fit = RealFit { cheb, parity, max_error: 0.0, lower_bound: 0.0, converged: false };
    let err = |u: f64| f(u) - fit.eval(u);
    let max_error = find_extrema(&err, parity).iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    RealFit { max_error, ..fit }
}

fn sign_for(parity: Parity, x: f64) -> f64 {
    match parity {
        Parity::Even => 1.0,
        Parity::Odd => x.signum(),
    }
}
