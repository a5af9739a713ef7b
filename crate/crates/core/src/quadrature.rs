//! Deterministic adaptive Simpson quadrature with a relative tolerance and an
//! evaluation budget.

use std::cell::Cell;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

impl Quadrature {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integral of `f` over `[a, b]` (`a <= b`).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(Error::input(format!("bad integration interval [{a}, {b}]")));
        }
        if a == b {
            return Ok(0.0);
        }
        let evals = Cell::new(0usize);
        let eval = |x: f64| -> Result<f64> {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Inconsistent(format!("non-finite integrand {v} at x = {x}")))
            }
        };

        let width = b - a;
        let h = width / INITIAL_PANELS as f64;
        let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
        for i in 0..=2 * INITIAL_PANELS {
            let x = if i == 2 * INITIAL_PANELS { b } else { a + 0.5 * h * i as f64 };
            nodes.push((x, eval(x)?));
        }
        let mut stack = Vec::new();
        let mut magnitude = 0.0;
        for p in (0..INITIAL_PANELS).rev() {
            let (xa, fa) = nodes[2 * p];
            let (_, fm) = nodes[2 * p + 1];
            let (xb, fb) = nodes[2 * p + 2];
            let whole = (xb - xa) / 6.0 * (fa + 4.0 * fm + fb);
            magnitude += (xb - xa) / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs());
            stack.push(Panel {
                a: xa,
                b: xb,
                fa,
                fm,
                fb,
                whole,
                depth: 0,
            });
        }
        let eps = self.rel_tol * magnitude.max(f64::MIN_POSITIVE);

        let mut total = 0.0;
        let mut converged = true;
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = 0.5 * (p.a + m);
            let rm = 0.5 * (m + p.b);
            let flm = eval(lm)?;
            let frm = eval(rm)?;
            let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
            let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
            let refined = left + right;
            let err = refined - p.whole;
            let allowed = 15.0 * eps * (p.b - p.a) / width;
            if err.abs() <= allowed || p.depth >= MAX_DEPTH {
                if err.abs() > allowed {
                    converged = false;
                }
                total += refined + err / 15.0;
            } else if evals.get() >= self.max_evals {
                let best = total + refined + stack.iter().map(|q| q.whole).sum::<f64>();
                return Err(Error::ToleranceNotMet {
                    best,
                    tol: self.rel_tol,
                    evaluations: evals.get(),
                });
            } else {
                stack.push(Panel {
                    a: m,
                    b: p.b,
                    fa: p.fm,
                    fm: frm,
                    fb: p.fb,
                    whole: right,
                    depth: p.depth + 1,
                });
                stack.push(Panel {
                    a: p.a,
                    b: m,
                    fa: p.fa,
                    fm: flm,
                    fb: p.fm,
                    whole: left,
                    depth: p.depth + 1,
                });
            }
        }
        if converged {
            Ok(total)
        } else {
            Err(Error::ToleranceNotMet {
                best: total,
                tol: self.rel_tol,
                evaluations: evals.get(),
            })
        }
    }

    /// Integral of `f` over `[a, ∞)` via `r = a + t/(1-t)`. The endpoint
    /// `t = 1` is sampled just inside the interval.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<f64> {
        let g = |t: f64| {
            let s = (1.0 - t).max(1e-9);
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}
