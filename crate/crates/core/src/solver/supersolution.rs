use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{PotentialC, RadialDrift};
use crate::geometry::ModelManifold;

/// Absolute slack allowed in `L[h] <= rhs`.
pub const SUPERSOLUTION_SLACK: f64 = 1e-12;

const DENSE_POINTS: usize = 20_001;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form candidate with its first two derivatives.
#[derive(Clone)]
pub enum Supersolution {
    Constant(f64),
    /// `h = C r^{-β}`
    InversePower { c: f64, beta: f64 },
    Custom {
        name: String,
        h: RadialFn,
        dh: RadialFn,
        d2h: RadialFn,
    },
}

impl fmt::Debug for Supersolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Supersolution {
    pub fn describe(&self) -> String {
        match self {
            Supersolution::Constant(w) => format!("constant({w})"),
            Supersolution::InversePower { c, beta } => format!("{c} r^-{beta}"),
            Supersolution::Custom { name, .. } => name.clone(),
        }
    }

    fn jet(&self, r: f64) -> (f64, f64, f64) {
        match self {
            Supersolution::Constant(w) => (*w, 0.0, 0.0),
            Supersolution::InversePower { c, beta } => {
                let h = c * r.powf(-beta);
                (h, -beta * h / r, beta * (beta + 1.0) * h / (r * r))
            }
            Supersolution::Custom { h, dh, d2h, .. } => (h(r), dh(r), d2h(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupersolutionReport {
    pub candidate: String,
    pub pass: bool,
    /// `rhs_bound - max L[h]`; negative on failure.
    pub margin: f64,
    pub max_operator: f64,
    /// Radius where `L[h]` is largest.
    pub witness_r: f64,
    pub domain: [f64; 2],
    pub points: usize,
}

/// Evaluates `L[h] = h'' + ((N-1)φ'/φ + b_r)h' - c h` on a dense grid of
/// `[r0, r_max]` (geometric when the domain spans more than a decade) and
/// checks `L[h] <= rhs_bound`.
pub fn verify_supersolution(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    potential: &PotentialC,
    candidate: &Supersolution,
    r0: f64,
    r_max: f64,
    rhs_bound: f64,
) -> Result<SupersolutionReport> {
    if r0 <= 0.0 {
        return Err(Error::PoleSingularity {
            what: "supersolution operator",
        });
    }
    if !(r_max > r0 && r_max.is_finite()) {
        return Err(Error::input(format!("bad supersolution domain [{r0}, {r_max}]")));
    }
    let geometric = r_max / r0 > 10.0;
    let last = (DENSE_POINTS - 1) as f64;
    let point = |i: usize| -> f64 {
        if i == DENSE_POINTS - 1 {
            r_max
        } else if geometric {
            r0 * (r_max / r0).powf(i as f64 / last)
        } else {
            r0 + (r_max - r0) * i as f64 / last
        }
    };
    let mut worst = f64::NEG_INFINITY;
    let mut witness_r = r0;
    for i in 0..DENSE_POINTS {
        let r = point(i);
        let (h, dh, d2h) = candidate.jet(r);
        let b = manifold.laplacian_coeff_unchecked(r) + drift.value(r);
        let l = d2h + b * dh - potential.value(r) * h;
        if !l.is_finite() {
            return Err(Error::input(format!("supersolution operator is not finite at r = {r}")));
        }
        if l > worst {
            worst = l;
            witness_r = r;
        }
    }
    Ok(SupersolutionReport {
        candidate: candidate.describe(),
        pass: worst <= rhs_bound + SUPERSOLUTION_SLACK,
        margin: rhs_bound - worst,
        max_operator: worst,
        witness_r,
        domain: [r0, r_max],
        points: DENSE_POINTS,
    })
}
