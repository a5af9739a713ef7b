//! Weight families `ψ = e^{-βr}`, `η = e^{-βr^θ}`, `ξ = (1+r)^{-τ}`, the
//! admissible-parameter conditions attached to each, and weighted `Lᵖ`
//! norms on model manifolds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sphere_constant, ModelManifold, WarpingFunction};
use crate::interp::MonotoneCubic;
use crate::quadrature::Quadrature;
use crate::solver::SolutionGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Weight {
    Exponential { beta: f64 },
    StretchedExponential { beta: f64, theta: f64 },
    Polynomial { tau: f64 },
}

impl Weight {
    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::input(format!("weight needs beta > 0, got {beta}")));
        }
        Ok(Weight::Exponential { beta })
    }

    pub fn stretched_exponential(beta: f64, theta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::input(format!("weight needs beta > 0, got {beta}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::input(format!("weight needs 0 < theta < 1, got {theta}")));
        }
        Ok(Weight::StretchedExponential { beta, theta })
    }

    pub fn polynomial(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::input(format!("weight needs tau > 0, got {tau}")));
        }
        Ok(Weight::Polynomial { tau })
    }

    /// The theorem whose uniqueness class this weight defines.
    pub fn theorem(&self) -> Theorem {
        match *self {
            Weight::Exponential { .. } => Theorem::T22,
            Weight::StretchedExponential { theta, .. } => Theorem::T23 { theta },
            Weight::Polynomial { .. } => Theorem::T24,
        }
    }

    /// `β` or `τ`, the parameter constrained by the admissibility conditions.
    pub fn parameter(&self) -> f64 {
        match *self {
            Weight::Exponential { beta } | Weight::StretchedExponential { beta, .. } => beta,
            Weight::Polynomial { tau } => tau,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Weight::Exponential { beta } => format!("exp(-{beta} r)"),
            Weight::StretchedExponential { beta, theta } => format!("exp(-{beta} r^{theta})"),
            Weight::Polynomial { tau } => format!("(1+r)^-{tau}"),
        }
    }
}

pub fn weight_eval(w: &Weight, r: f64) -> f64 {
    match *w {
        Weight::Exponential { beta } => (-beta * r).exp(),
        Weight::StretchedExponential { beta, theta } => (-beta * r.powf(theta)).exp(),
        Weight::Polynomial { tau } => (1.0 + r).powf(-tau),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Theorem {
    /// Exponential weight under `H0`.
    T22,
    /// Stretched-exponential weight under `H0` and `H1(θ)`.
    T23 { theta: f64 },
    /// Polynomial weight under `H2`.
    T24,
}

impl Theorem {
    pub fn label(&self) -> &'static str {
        match self {
            Theorem::T22 => "T22",
            Theorem::T23 { .. } => "T23",
            Theorem::T24 => "T24",
        }
    }
}

/// `δ_min = p / (2(p-1))`, the reciprocal of the largest admissible `ε = 2 - 2/p`.
pub fn delta_min(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    Ok(p / (2.0 * (p - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleParams {
    pub theorem: Theorem,
    pub p: f64,
    pub delta_min: f64,
    /// Lower bound the weight parameter must strictly exceed.
    pub parameter_lower_bound: f64,
    pub parameter: f64,
    /// `p·c₀` must strictly exceed this.
    pub threshold_pc0: f64,
    /// `threshold_pc0 / p`.
    pub min_c0: f64,
    pub c0: f64,
    pub parameter_ok: bool,
    pub c0_ok: bool,
    pub feasible: bool,
}

/// Evaluates the terminal parameter condition of `theorem` at
/// `δ = δ̂ = δ_min(p)`.
pub fn admissible_params(
    theorem: Theorem,
    alpha: f64,
    k: f64,
    dim: usize,
    p: f64,
    c0: f64,
    parameter: f64,
) -> Result<AdmissibleParams> {
    let delta = delta_min(p)?;
    if !(c0 > 0.0) || !(alpha >= 0.0) || !(k >= 0.0) {
        return Err(Error::input(format!(
            "admissibility needs c0 > 0, alpha >= 0, K >= 0 (got c0 = {c0}, alpha = {alpha}, K = {k})"
        )));
    }
    let (lower, threshold) = match theorem {
        Theorem::T22 => {
            let beta = parameter;
            (alpha, beta * beta * delta + beta * k)
        }
        Theorem::T23 { theta } => {
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::input(format!("T23 needs 0 < theta < 1, got {theta}")));
            }
            let beta = parameter;
            (alpha, beta * beta * theta * theta * delta + beta * k * theta + k)
        }
        Theorem::T24 => {
            let tau = parameter;
            (alpha + dim as f64 - 1.0, tau * delta / 2.0 * (tau + 2.0) + k * (tau + 1.0))
        }
    };
    let parameter_ok = parameter > lower;
    let c0_ok = p * c0 > threshold;
    Ok(AdmissibleParams {
        theorem,
        p,
        delta_min: delta,
        parameter_lower_bound: lower,
        parameter,
        threshold_pc0: threshold,
        min_c0: threshold / p,
        c0,
        parameter_ok,
        c0_ok,
        feasible: parameter_ok && c0_ok,
    })
}

/// A radial function to be measured in a weighted norm.
pub enum RadialField<'a> {
    Constant(f64),
    /// Closed form; `bounded` declares `sup |u| < ∞` on `[0, ∞)`.
    Function {
        f: &'a (dyn Fn(f64) -> f64 + Sync),
        bounded: bool,
    },
    /// Discrete solution, continued beyond its last node by its boundary value.
    Grid(&'a SolutionGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Convergent,
    Divergent,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedNorm {
    /// `c_N ∫₀^{R_max} |u|^p w φ^{N-1} dr`; infinite for a divergent tail
    /// with `R_max = ∞`.
    pub value: f64,
    pub r_max: f64,
    pub tail: TailVerdict,
}

/// How `|u|` behaves at infinity, as far as exponent arithmetic is concerned.
enum FarField {
    Zero,
    /// Tends to a nonzero constant.
    Constant,
    /// Bounded, otherwise unknown.
    Bounded,
    Unknown,
}

fn far_field(u: &RadialField<'_>) -> FarField {
    match u {
        RadialField::Constant(c) if *c == 0.0 => FarField::Zero,
        RadialField::Constant(_) => FarField::Constant,
        RadialField::Function { bounded: true, .. } => FarField::Bounded,
        RadialField::Function { .. } => FarField::Unknown,
        RadialField::Grid(g) => {
            if g.values().iter().all(|v| *v == 0.0) {
                FarField::Zero
            } else if g.boundary_value() != 0.0 {
                FarField::Constant
            } else {
                FarField::Bounded
            }
        }
    }
}

/// Growth of the volume density `φ^{N-1}` at infinity.
enum DensityGrowth {
    /// `~ r^e`
    Power(f64),
    /// `~ e^{a r}`
    Exponential(f64),
    Unknown,
}

fn density_growth(manifold: &ModelManifold) -> DensityGrowth {
    let n1 = manifold.dim() as f64 - 1.0;
    match manifold.warping() {
        WarpingFunction::Euclidean => DensityGrowth::Power(n1),
        WarpingFunction::PowerLaw { lambda } => DensityGrowth::Power(n1 * lambda),
        WarpingFunction::Hyperbolic { curvature } => DensityGrowth::Exponential(n1 * curvature.sqrt()),
        WarpingFunction::Sampled(_) => DensityGrowth::Unknown,
    }
}

/// Whether `∫^∞ w φ^{N-1} dr` is finite, by exponent arithmetic.
fn weighted_volume_finite(manifold: &ModelManifold, w: &Weight) -> Option<bool> {
    match (density_growth(manifold), *w) {
        (DensityGrowth::Unknown, _) => None,
        (DensityGrowth::Power(e), Weight::Polynomial { tau }) => Some(e - tau < -1.0),
        (DensityGrowth::Power(_), _) => Some(true),
        (DensityGrowth::Exponential(a), Weight::Exponential { beta }) => Some(beta > a),
        (DensityGrowth::Exponential(a), _) => Some(a == 0.0),
    }
}

fn tail_verdict(manifold: &ModelManifold, u: &RadialField<'_>, w: &Weight) -> TailVerdict {
    let far = far_field(u);
    if let FarField::Zero = far {
        return TailVerdict::Convergent;
    }
    match (weighted_volume_finite(manifold, w), far) {
        (None, _) | (_, FarField::Unknown) => TailVerdict::Undetermined,
        (Some(true), _) => TailVerdict::Convergent,
        (Some(false), FarField::Constant) => TailVerdict::Divergent,
        (Some(false), _) => TailVerdict::Undetermined,
    }
}

pub const NORM_REL_TOL: f64 = 1e-10;

/// Weighted `Lᵖ` norm (to the `p`-th power) of a radial function over the
/// geodesic ball of radius `r_max` (which may be infinite).
pub fn weighted_lp_norm(
    manifold: &ModelManifold,
    u: &RadialField<'_>,
    w: &Weight,
    p: f64,
    r_max: f64,
) -> Result<WeightedNorm> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    if !(r_max >= 0.0) {
        return Err(Error::input(format!("norm radius must be nonnegative, got {r_max}")));
    }
    let tail = tail_verdict(manifold, u, w);
    if let FarField::Zero = far_field(u) {
        return Ok(WeightedNorm {
            value: 0.0,
            r_max,
            tail,
        });
    }
    if r_max.is_infinite() && tail == TailVerdict::Divergent {
        return Ok(WeightedNorm {
            value: f64::INFINITY,
            r_max,
            tail,
        });
    }

    let interpolant;
    let (eval, grid_end, boundary): (Box<dyn Fn(f64) -> f64 + '_>, f64, f64) = match u {
        RadialField::Constant(c) => {
            let c = *c;
            (Box::new(move |_| c), f64::INFINITY, c)
        }
        RadialField::Function { f, .. } => (Box::new(|r| f(r)), f64::INFINITY, 0.0),
        RadialField::Grid(g) => {
            interpolant = MonotoneCubic::new(g.grid().nodes().to_vec(), g.values().to_vec())?;
            let end = g.grid().r_max();
            let gamma = g.boundary_value();
            let interp = &interpolant;
            (
                Box::new(move |r| if r >= end { gamma } else { interp.eval(r) }),
                end,
                gamma,
            )
        }
    };
    let integrand = |r: f64| eval(r).abs().powf(p) * weight_eval(w, r) * manifold.density(r);
    let q = Quadrature::with_tol(NORM_REL_TOL);
    let c_n = sphere_constant(manifold.dim())?;

    let split = grid_end.min(r_max);
    if split.is_infinite() {
        return Ok(WeightedNorm {
            value: c_n * q.integrate_to_infinity(integrand, 0.0)?,
            r_max,
            tail,
        });
    }
    let mut total = q.integrate(integrand, 0.0, split)?;
    if r_max > split {
        let gp = boundary.abs().powf(p);
        let tail_integrand = |r: f64| gp * weight_eval(w, r) * manifold.density(r);
        total += if r_max.is_infinite() {
            q.integrate_to_infinity(tail_integrand, split)?
        } else {
            q.integrate(tail_integrand, split, r_max)?
        };
    }
    Ok(WeightedNorm {
        value: c_n * total,
        r_max,
        tail,
    })
}
