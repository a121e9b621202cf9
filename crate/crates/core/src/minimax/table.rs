//! Precomputed `ξ(ε, r)` and polynomial coefficients.
//!
//! Text format, one record per line, `#` starts a comment:
//!
//! ```text
//! <eps> <r> <scope> <achieved_error> <re w_0> <im w_0> ... <re w_{r-1}> <im w_{r-1}>
//! ```
//!
//! `w_j` multiplies `x^j`. The built-in table covers `ε ∈ {1e-1, …, 1e-7}`
//! and `r ∈ 1..=25`; it is regenerated with `pftycho scope-table`.

use std::fmt::Write as _;

use num_complex::Complex64;
use once_cell::sync::Lazy;

use super::{best_approx, scope_from, ApproxPoly, MAX_TERMS};
use crate::error::{Error, Result};

pub const TABLE_EPSILONS: [f64; 7] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

static BUILTIN: Lazy<ScopeTable> = Lazy::new(|| {
    ScopeTable::parse(include_str!("../../data/scope_table.txt")).expect("built-in scope table is malformed")
});

#[derive(Clone, Debug, PartialEq)]
pub struct ScopeRecord {
    pub eps: f64,
    pub r: usize,
    pub scope: f64,
    pub achieved_error: f64,
    pub coeffs: Vec<Complex64>,
}

impl ScopeRecord {
    pub fn poly(&self) -> ApproxPoly {
        ApproxPoly {
            coeffs: self.coeffs.clone(),
            scope: self.scope,
            tolerance: Some(self.eps),
            achieved_error: self.achieved_error,
            lower_bound: f64::NAN,
            method: super::FitMethod::Exchange,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScopeTable {
    records: Vec<ScopeRecord>,
}

fn same_eps(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

impl ScopeTable {
    pub fn builtin() -> &'static ScopeTable {
        &BUILTIN
    }

    /// Runs the scope search for every `(ε, r)` cell. Each `r` starts its
    /// bracket at the previous scope, so `ξ` is nondecreasing in `r`.
    pub fn compute(epsilons: &[f64], max_terms: usize) -> Result<Self> {
        let max_terms = max_terms.min(MAX_TERMS);
        let rows: Vec<Result<Vec<ScopeRecord>>> = std::thread::scope(|s| {
            let handles: Vec<_> = epsilons
                .iter()
                .map(|&eps| {
                    s.spawn(move || {
                        let mut out = Vec::with_capacity(max_terms);
                        let mut prev = None;
                        for r in 1..=max_terms {
                            let xi = scope_from(eps, r, prev)?;
                            let record = if xi > 0.0 {
                                let p = best_approx(r, xi)?;
                                ScopeRecord { eps, r, scope: xi, achieved_error: p.achieved_error, coeffs: p.coeffs }
                            } else {
                                ScopeRecord { eps, r, scope: 0.0, achieved_error: 0.0, coeffs: vec![Complex64::new(1.0, 0.0); 1] }
                            };
                            prev = (xi > 0.0).then_some(xi);
                            out.push(record);
                        }
                        Ok(out)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("scope worker panicked")).collect()
        });
        let mut records = Vec::new();
        for row in rows {
            records.extend(row?);
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ScopeRecord] {
        &self.records
    }

    pub fn has_tolerance(&self, eps: f64) -> bool {
        self.records.iter().any(|rec| same_eps(rec.eps, eps))
    }

    pub fn get(&self, eps: f64, r: usize) -> Option<&ScopeRecord> {
        self.records.iter().find(|rec| rec.r == r && same_eps(rec.eps, eps))
    }

    pub fn scope(&self, eps: f64, r: usize) -> Option<f64> {
        self.get(eps, r).map(|rec| rec.scope)
    }

    /// Smallest tabulated `r` whose scope reaches `target`.
    pub fn min_terms(&self, eps: f64, target: f64) -> Option<usize> {
        self.records
            .iter()
            .filter(|rec| same_eps(rec.eps, eps) && rec.scope >= target)
            .map(|rec| rec.r)
            .min()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# scope table for polynomial approximations of exp(i*pi*x)\n");
        s.push_str("# eps r scope achieved_error re(w_0) im(w_0) ... re(w_{r-1}) im(w_{r-1})\n");
        for rec in &self.records {
            let _ = write!(s, "{:e} {} {:.17e} {:.17e}", rec.eps, rec.r, rec.scope, rec.achieved_error);
            for c in &rec.coeffs {
                let _ = write!(s, " {:.17e} {:.17e}", c.re, c.im);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Format(format!("scope table line {}: {what}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(bad("too few fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            let eps = num(fields[0])?;
            let r: usize = fields[1].parse().map_err(|_| bad("bad term count"))?;
            let rest = &fields[4..];
            if rest.len() % 2 != 0 {
                return Err(bad("odd number of coefficient fields"));
            }
            let coeffs = rest
                .chunks(2)
                .map(|p| Ok(Complex64::new(num(p[0])?, num(p[1])?)))
                .collect::<Result<Vec<_>>>()?;
            if coeffs.is_empty() || coeffs.len() > r {
                return Err(bad("coefficient count does not match r"));
            }
            records.push(ScopeRecord { eps, r, scope: num(fields[2])?, achieved_error: num(fields[3])?, coeffs });
        }
        Ok(Self { records })
    }
}
