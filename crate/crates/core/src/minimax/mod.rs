//! Minimax polynomial approximations to `e^{iπx}` and the scope table.
//!
//! For a degree bound `r - 1` and a half-width `ξ`, [`best_approx`] fits
//! `cos(πx)` with even powers and `sin(πx)` with odd powers separately (each
//! a real minimax problem on `[0, ξ]`) and merges them into one complex
//! polynomial. The scope `ξ(ε, r)` is the largest half-width on which that
//! polynomial stays within `ε`; the PFT planner picks the smallest `r` whose
//! scope covers `m̃/p`.
//!
//! Fits are near-minimax: each real component is within `1.05×` of its own
//! minimax error, and the larger of those two errors lower-bounds the
//! complex minimax error.

mod remez;
mod table;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use remez::{chebyshev_interpolant, remez, Parity, RealFit};

pub use table::{ScopeRecord, ScopeTable, TABLE_EPSILONS};

/// Largest number of polynomial terms considered.
pub const MAX_TERMS: usize = 25;

/// Points of the a-posteriori error scan over `[-ξ, ξ]`.
pub const ERROR_GRID: usize = 8193;

const NEAR_MINIMAX: f64 = 1.05;
const SCOPE_RTOL: f64 = 1e-3;
const SCOPE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMethod {
    Exchange,
    ChebyshevFallback,
}

/// A polynomial `Σ_j w_j x^j` (`j < r`) approximating `e^{iπx}` on `|x| ≤ scope`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPoly {
    pub coeffs: Vec<Complex64>,
    pub scope: f64,
    /// Target tolerance when the polynomial came from a scope search.
    pub tolerance: Option<f64>,
    pub achieved_error: f64,
    /// Larger of the two real minimax errors; the complex minimax error is at least this.
    pub lower_bound: f64,
    pub method: FitMethod,
}

impl ApproxPoly {
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        eval_poly(&self.coeffs, x)
    }
}

pub(crate) fn eval_poly(coeffs: &[Complex64], x: f64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Max of `|P(x) − e^{iπx}|` over a uniform grid of [`ERROR_GRID`] points on `[-ξ, ξ]`.
pub fn max_grid_error(coeffs: &[Complex64], scope: f64) -> f64 {
    let n = ERROR_GRID - 1;
    (0..=n)
        .map(|i| {
            let x = scope * (2.0 * i as f64 / n as f64 - 1.0);
            (eval_poly(coeffs, x) - Complex64::from_polar(1.0, PI * x)).norm()
        })
        .fold(0.0, f64::max)
}

fn merge(cos_fit: &RealFit, sin_fit: &RealFit, r: usize, scope: f64) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); r];
    // u = x / ξ, so the coefficient of x^j is a_j / ξ^j.
    for (j, a) in cos_fit.monomial().into_iter().enumerate() {
        coeffs[j].re += a / scope.powi(j as i32);
    }
    for (j, a) in sin_fit.monomial().into_iter().enumerate() {
        coeffs[j].im += a / scope.powi(j as i32);
    }
    coeffs
}

/// Near-minimax degree-`(r-1)` approximation to `e^{iπx}` on `|x| ≤ scope`.
pub fn best_approx(r: usize, scope: f64) -> Result<ApproxPoly> {
    if r == 0 || r > MAX_TERMS {
        return invalid(format!("number of terms r = {r} outside 1..={MAX_TERMS}"));
    }
    if !(scope > 0.0 && scope.is_finite()) {
        return invalid(format!("scope must be positive and finite, got {scope}"));
    }
    let cos = move |u: f64| (PI * scope * u).cos();
    let sin = move |u: f64| (PI * scope * u).sin();
    let (n_even, n_odd) = ((r + 1) / 2, r / 2);

    let cos_fit = remez(&cos, Parity::Even, n_even);
    let sin_fit = remez(&sin, Parity::Odd, n_odd);
    let lower_bound = cos_fit.lower_bound.max(sin_fit.lower_bound);
    let coeffs = merge(&cos_fit, &sin_fit, r, scope);
    let achieved_error = max_grid_error(&coeffs, scope);
    let exchange = ApproxPoly {
        coeffs,
        scope,
        tolerance: None,
        achieved_error,
        lower_bound,
        method: FitMethod::Exchange,
    };
    let floor = 1e-14 * (PI * scope).exp();
    let part_ok = |f: &RealFit| f.max_error <= NEAR_MINIMAX * f.lower_bound || f.max_error <= floor;
    if cos_fit.converged && sin_fit.converged && part_ok(&cos_fit) && part_ok(&sin_fit) {
        return Ok(exchange);
    }

    let cos_fb = chebyshev_interpolant(&cos, Parity::Even, n_even);
    let sin_fb = chebyshev_interpolant(&sin, Parity::Odd, n_odd);
    let pick = |a: RealFit, b: RealFit| if b.max_error < a.max_error { RealFit { lower_bound: a.lower_bound, ..b } } else { a };
    let cos_best = pick(cos_fit, cos_fb);
    let sin_best = pick(sin_fit, sin_fb);
    for part in [&cos_best, &sin_best] {
        if !part_ok(part) {
            return Err(Error::NonConvergence { r, scope, residual: part.max_error - part.lower_bound });
        }
    }
    let coeffs = merge(&cos_best, &sin_best, r, scope);
    Ok(ApproxPoly {
        achieved_error: max_grid_error(&coeffs, scope),
        coeffs,
        method: FitMethod::ChebyshevFallback,
        ..exchange
    })
}

fn check_tolerance(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("tolerance must lie in (0, 1), got {eps}"));
    }
    Ok(())
}

/// Scope search starting from a half-width already known to be feasible.
pub(crate) fn scope_from(eps: f64, r: usize, feasible: Option<f64>) -> Result<f64> {
    check_tolerance(eps)?;
    if r == 0 || r > MAX_TERMS {
        return invalid(format!("number of terms r = {r} outside 1..={MAX_TERMS}"));
    }
    let ok = |xi: f64| -> Result<bool> { Ok(best_approx(r, xi)?.achieved_error <= eps) };
    let mut lo = match feasible {
        Some(xi) if xi > 0.0 => xi,
        _ => {
            if !ok(SCOPE_FLOOR)? {
                return Ok(0.0);
            }
            SCOPE_FLOOR
        }
    };
    let mut hi = (2.0 * lo).max(1e-3);
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Numerical(format!("scope for eps = {eps}, r = {r} did not bracket")));
        }
    }
    while hi - lo > SCOPE_RTOL * hi {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `ξ(ε, r)`: the largest half-width on which `r` terms reach tolerance `ε`,
/// found by bisection (relative tolerance `1e-3`, returning the feasible end).
pub fn scope(eps: f64, r: usize) -> Result<f64> {
    scope_from(eps, r, None)
}

/// Smallest `r ≤ 25` with `ξ(ε, r) ≥ target`, read from the built-in table
/// when `ε` is tabulated.
pub fn min_degree(eps: f64, target: f64) -> Result<usize> {
    check_tolerance(eps)?;
    if !(target > 0.0) {
        return invalid(format!("scope target must be positive, got {target}"));
    }
    if let Some(r) = ScopeTable::builtin().min_terms(eps, target) {
        return Ok(r);
    }
    if ScopeTable::builtin().has_tolerance(eps) {
        return Err(no_degree(eps, target));
    }
    let mut prev = None;
    for r in 1..=MAX_TERMS {
        let xi = scope_from(eps, r, prev)?;
        if xi >= target {
            return Ok(r);
        }
        prev = (xi > 0.0).then_some(xi);
    }
    Err(no_degree(eps, target))
}

fn no_degree(eps: f64, target: f64) -> Error {
    Error::Configuration(format!(
        "no polynomial with at most {MAX_TERMS} terms reaches tolerance {eps:e} on |x| <= {target} (m̃/p); increase p"
    ))
}
