//! Radial drift fields `b = b_r(r) ∂_r`, zero-order potentials `c(r)` and
//! grid certification of the structural hypotheses on them.
//!
//! The outward region `D₊` is `{r : b_r(r) > 0}`. Every hypothesis is
//! certified on a finite radial grid; for the declared `PowerAffine` family
//! the growth exponent is known exactly and decides the verdict, for other
//! profiles it is fitted from the last decade of the grid and the report is
//! flagged accordingly.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{linear_fit, ModelManifold};
use crate::interp::MonotoneCubic;

/// Multiplicative safety margin applied to grid-fitted constants before they
/// feed the admissibility calculators.
pub const SAFETY_INFLATION: f64 = 1.05;

/// Relative size of a violation for it to count as a witness.
pub const WITNESS_MARGIN: f64 = 0.01;

/// Fitted tail exponents above this are treated as growth.
const GROWTH_SLACK: f64 = 0.05;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DriftProfile {
    Zero,
    /// `b_r(r) = A (offset + r)^s · r/(1+r)`
    PowerAffine {
        amplitude: f64,
        exponent: f64,
        offset: f64,
    },
    /// Monotone cubic interpolant through `(r, b_r)` samples with `b_r(0) = 0`.
    Sampled(MonotoneCubic),
    /// Closed-form profile with its derivative.
    ClosedForm {
        name: String,
        value: RadialFn,
        derivative: RadialFn,
    },
}

impl fmt::Debug for DriftProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl DriftProfile {
    fn describe(&self) -> String {
        match self {
            DriftProfile::Zero => "zero".into(),
            DriftProfile::PowerAffine {
                amplitude,
                exponent,
                offset,
            } => format!("power_affine(A={amplitude}, s={exponent}, offset={offset})"),
            DriftProfile::Sampled(p) => {
                let checksum: f64 = p.ys().iter().sum();
                format!("sampled(n={}, sum={checksum:e})", p.xs().len())
            }
            DriftProfile::ClosedForm { name, .. } => format!("closed_form({name})"),
        }
    }
}

/// Asymptotic growth exponent of a drift profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthExponent {
    Exact(f64),
    /// Identically zero profile.
    Vanishing,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct RadialDrift {
    profile: DriftProfile,
}

impl RadialDrift {
    pub fn zero() -> Self {
        Self {
            profile: DriftProfile::Zero,
        }
    }

    pub fn power_affine(amplitude: f64, exponent: f64, offset: f64) -> Result<Self> {
        if ![amplitude, exponent, offset].iter().all(|v| v.is_finite()) {
            return Err(Error::input("power-affine drift parameters must be finite"));
        }
        if offset < 0.0 || (offset == 0.0 && exponent < 0.0) {
            return Err(Error::input(format!(
                "power-affine drift needs offset > 0, or offset = 0 with exponent >= 0 (got offset {offset}, exponent {exponent})"
            )));
        }
        Ok(Self {
            profile: DriftProfile::PowerAffine {
                amplitude,
                exponent,
                offset,
            },
        })
    }

    pub fn sampled(samples: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if xs.first() != Some(&0.0) || ys.first() != Some(&0.0) {
            return Err(Error::input("sampled drift must start with (0, 0): radial fields vanish at the pole"));
        }
        Ok(Self {
            profile: DriftProfile::Sampled(MonotoneCubic::new(xs, ys)?),
        })
    }

    pub fn closed_form<F, D>(name: impl Into<String>, value: F, derivative: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if value(0.0).abs() > 1e-12 {
            return Err(Error::input("radial drift must vanish at the pole"));
        }
        Ok(Self {
            profile: DriftProfile::ClosedForm {
                name: name.into(),
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
        })
    }

    pub fn profile(&self) -> &DriftProfile {
        &self.profile
    }

    /// `⟨b, ∇r⟩ = b_r(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match &self.profile {
            DriftProfile::Zero => 0.0,
            DriftProfile::PowerAffine {
                amplitude,
                exponent,
                offset,
            } => amplitude * (offset + r).powf(*exponent) * r / (1.0 + r),
            DriftProfile::Sampled(p) => p.eval(r),
            DriftProfile::ClosedForm { value, .. } => value(r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match &self.profile {
            DriftProfile::Zero => 0.0,
            DriftProfile::PowerAffine {
                amplitude,
                exponent,
                offset,
            } => {
                if r == 0.0 {
                    return self.derivative_at_pole();
                }
                let base = offset + r;
                let g = r / (1.0 + r);
                let dg = 1.0 / ((1.0 + r) * (1.0 + r));
                amplitude * (exponent * base.powf(exponent - 1.0) * g + base.powf(*exponent) * dg)
            }
            DriftProfile::Sampled(p) => p.eval_with_derivative(r).1,
            DriftProfile::ClosedForm { derivative, .. } => derivative(r),
        }
    }

    /// `b_r'(0)`; the divergence at the pole is `N b_r'(0)`.
    pub fn derivative_at_pole(&self) -> f64 {
        match &self.profile {
            DriftProfile::PowerAffine {
                amplitude,
                exponent,
                offset,
            } => {
                if *offset > 0.0 {
                    amplitude * offset.powf(*exponent)
                } else if *exponent == 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            _ => self.derivative(0.0),
        }
    }

    pub fn growth_exponent(&self) -> GrowthExponent {
        match &self.profile {
            DriftProfile::Zero => GrowthExponent::Vanishing,
            DriftProfile::PowerAffine {
                amplitude, exponent, ..
            } => {
                if *amplitude == 0.0 {
                    GrowthExponent::Vanishing
                } else {
                    GrowthExponent::Exact(*exponent)
                }
            }
            _ => GrowthExponent::Unknown,
        }
    }

    pub fn describe(&self) -> String {
        self.profile.describe()
    }
}

/// `div b = b_r' + (N-1) φ'/φ · b_r` at `r > 0`.
pub fn divergence(manifold: &ModelManifold, drift: &RadialDrift, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::PoleSingularity { what: "divergence" });
    }
    Ok(divergence_unchecked(manifold, drift, r))
}

/// Limit of the divergence at the pole, `N b_r'(0)`.
pub fn divergence_at_pole(manifold: &ModelManifold, drift: &RadialDrift) -> f64 {
    manifold.dim() as f64 * drift.derivative_at_pole()
}

fn divergence_unchecked(manifold: &ModelManifold, drift: &RadialDrift, r: f64) -> f64 {
    if r == 0.0 {
        return divergence_at_pole(manifold, drift);
    }
    let b = drift.value(r);
    let advect = if b == 0.0 {
        0.0
    } else {
        manifold.laplacian_coeff_unchecked(r) * b
    };
    drift.derivative(r) + advect
}

/// `[v]₋ = max{0, -v}`
pub fn negative_part(v: f64) -> f64 {
    (-v).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialProfile {
    Constant(f64),
    /// `c(r) = Σ a_k r^k`
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialC {
    profile: PotentialProfile,
    floor: f64,
}

impl PotentialC {
    pub fn constant(c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::input(format!("potential floor must be positive, got {c0}")));
        }
        Ok(Self {
            profile: PotentialProfile::Constant(c0),
            floor: c0,
        })
    }

    /// Polynomial potential with a declared floor `c₀`; the floor is checked
    /// against the profile by the `H3` certification, not here.
    pub fn polynomial(coefficients: Vec<f64>, floor: f64) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::input("polynomial potential needs finite coefficients"));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::input(format!("potential floor must be positive, got {floor}")));
        }
        Ok(Self {
            profile: PotentialProfile::Polynomial(coefficients),
            floor,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        match &self.profile {
            PotentialProfile::Constant(c) => *c,
            PotentialProfile::Polynomial(a) => a.iter().rev().fold(0.0, |acc, &ak| acc * r + ak),
        }
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    pub fn describe(&self) -> String {
        match &self.profile {
            PotentialProfile::Constant(c) => format!("constant({c})"),
            PotentialProfile::Polynomial(a) => format!("polynomial({a:?}, floor={})", self.floor),
        }
    }
}

/// Radial test grid for hypothesis certification: uniform on `[0, 1]`,
/// geometric beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisGrid {
    nodes: Vec<f64>,
}

impl HypothesisGrid {
    pub const MIN_RADIUS: f64 = 100.0;
    pub const MIN_NODES: usize = 1000;

    pub fn standard(r_max: f64, nodes: usize) -> Result<Self> {
        if !(r_max >= Self::MIN_RADIUS) || nodes < Self::MIN_NODES {
            return Err(Error::InsufficientGrid(format!(
                "need R_max >= {} and >= {} nodes, got R_max = {r_max}, {nodes} nodes",
                Self::MIN_RADIUS,
                Self::MIN_NODES
            )));
        }
        let inner = nodes / 5;
        let outer = nodes - inner - 1;
        let mut v: Vec<f64> = (0..=inner).map(|i| i as f64 / inner as f64).collect();
        let q = r_max.powf(1.0 / outer as f64);
        v.extend((1..=outer).map(|j| q.powi(j as i32)));
        *v.last_mut().unwrap() = r_max;
        Ok(Self { nodes: v })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.first() != Some(&0.0) {
            return Err(Error::InsufficientGrid("grid must start at the pole".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InsufficientGrid("grid must be strictly increasing".into()));
        }
        let r_max = *nodes.last().unwrap();
        if r_max < Self::MIN_RADIUS || nodes.len() < Self::MIN_NODES {
            return Err(Error::InsufficientGrid(format!(
                "need R_max >= {} and >= {} nodes, got R_max = {r_max}, {} nodes",
                Self::MIN_RADIUS,
                Self::MIN_NODES,
                nodes.len()
            )));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

impl Default for HypothesisGrid {
    fn default() -> Self {
        Self::standard(1000.0, 2000).expect("default grid parameters are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Hypothesis {
    /// Bounded drift on `D₊`, bounded `[div b]₋`.
    H0,
    /// Growth `(1+r)^σ` on `D₊` with `σ <= 1 - θ`.
    H1 { theta: f64 },
    /// Growth `(1+r)^σ` on `D₊` with `σ <= 1`.
    H2,
    /// `c >= c₀ > 0`.
    H3,
    /// Outward drift growing at least like `K r^σ`, `σ > 1`, `K > 1`, beyond `R₀ > 1`.
    S22,
}

impl Hypothesis {
    pub fn label(&self) -> String {
        match self {
            Hypothesis::H0 => "H0".into(),
            Hypothesis::H1 { theta } => format!("H1(theta={theta})"),
            Hypothesis::H2 => "H2".into(),
            Hypothesis::H3 => "H3".into(),
            Hypothesis::S22 => "S22".into(),
        }
    }

    /// Largest admissible growth exponent for the bound hypotheses.
    fn sigma_limit(&self) -> Option<f64> {
        match self {
            Hypothesis::H0 => Some(0.0),
            Hypothesis::H1 { theta } => Some(1.0 - theta),
            Hypothesis::H2 => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub r: f64,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    /// Relative size of the violation, `|lhs - rhs| / |rhs|`.
    pub fn violation(&self) -> f64 {
        if self.rhs == 0.0 {
            f64::INFINITY
        } else {
            ((self.lhs - self.rhs) / self.rhs).abs()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FittedConstants {
    /// Smallest constant certified on the grid (`K₁`, `K₃`, `K₂` or the `K` of
    /// the sharpness condition).
    pub k: Option<f64>,
    /// `k` inflated by [`SAFETY_INFLATION`].
    pub k_certified: Option<f64>,
    pub sigma: Option<f64>,
    pub theta: Option<f64>,
    pub r0: Option<f64>,
    pub c0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub pass: bool,
    pub constants: FittedConstants,
    /// Growth exponent used for the verdict.
    pub exponent: Option<f64>,
    /// `true` when the exponent was fitted from grid data rather than known.
    pub exponent_fitted: bool,
    pub witnesses: Vec<Witness>,
}

/// Certifies `hypothesis` for the drift `b` and potential `c` on `grid`.
pub fn check_hypothesis(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    potential: &PotentialC,
    hypothesis: Hypothesis,
    grid: &HypothesisGrid,
) -> Result<HypothesisReport> {
    match hypothesis {
        Hypothesis::H0 | Hypothesis::H1 { .. } | Hypothesis::H2 => check_growth_bound(manifold, drift, hypothesis, grid),
        Hypothesis::H3 => Ok(check_potential(potential, grid)),
        Hypothesis::S22 => Ok(check_sharpness(drift, grid)),
    }
}

/// Bound function `(1+r)^σ` for the drift and `(1+r)^{σ-1}` for `[div b]₋`
/// (both constant for `H0`).
fn bounds(hypothesis: Hypothesis, sigma: f64, r: f64) -> (f64, f64) {
    match hypothesis {
        Hypothesis::H0 => (1.0, 1.0),
        _ => ((1.0 + r).powf(sigma), (1.0 + r).powf(sigma - 1.0)),
    }
}

/// Checks the growth inequalities of `H0`/`H1`/`H2` with a given constant
/// and exponent; returns every grid radius where one fails.
pub fn check_bound(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    hypothesis: Hypothesis,
    grid: &HypothesisGrid,
    sigma: f64,
    k: f64,
) -> Vec<Witness> {
    let mut out = Vec::new();
    for &r in grid.nodes() {
        let (drift_bound, div_bound) = bounds(hypothesis, sigma, r);
        let b = drift.value(r);
        if b > 0.0 && b > k * drift_bound {
            out.push(Witness {
                r,
                inequality: drift_inequality(hypothesis),
                lhs: b,
                rhs: k * drift_bound,
            });
        }
        let neg_div = negative_part(divergence_unchecked(manifold, drift, r));
        if neg_div > k * div_bound {
            out.push(Witness {
                r,
                inequality: div_inequality(hypothesis),
                lhs: neg_div,
                rhs: k * div_bound,
            });
        }
    }
    out
}

fn drift_inequality(h: Hypothesis) -> String {
    match h {
        Hypothesis::H0 => "|b| <= K on D+".into(),
        _ => "<b, grad r> <= K (1+r)^sigma on D+".into(),
    }
}

fn div_inequality(h: Hypothesis) -> String {
    match h {
        Hypothesis::H0 => "[div b]_- <= K".into(),
        _ => "[div b]_- <= K (1+r)^(sigma-1)".into(),
    }
}

fn check_growth_bound(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    hypothesis: Hypothesis,
    grid: &HypothesisGrid,
) -> Result<HypothesisReport> {
    let limit = hypothesis.sigma_limit().expect("bound hypothesis");
    if let Hypothesis::H1 { theta } = hypothesis {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::input(format!("H1 needs 0 < theta < 1, got {theta}")));
        }
    }
    let theta = match hypothesis {
        Hypothesis::H1 { theta } => Some(theta),
        _ => None,
    };

    let (exponent, fitted) = match drift.growth_exponent() {
        GrowthExponent::Vanishing => {
            return Ok(HypothesisReport {
                hypothesis,
                pass: true,
                constants: FittedConstants {
                    k: Some(0.0),
                    k_certified: Some(0.0),
                    theta,
                    ..Default::default()
                },
                exponent: None,
                exponent_fitted: false,
                witnesses: Vec::new(),
            });
        }
        GrowthExponent::Exact(s) => (Some(s), false),
        GrowthExponent::Unknown => (None, true),
    };
    // the exponent the constant is fitted against; unknown profiles are held
    // to the weakest admissible bound
    let sigma = exponent.map_or(limit, |s| s.min(limit));

    let nodes = grid.nodes();
    let ratio = |r: f64| -> f64 {
        let (drift_bound, div_bound) = bounds(hypothesis, sigma, r);
        let b = drift.value(r);
        let on_plus = if b > 0.0 { b / drift_bound } else { 0.0 };
        let neg_div = negative_part(divergence_unchecked(manifold, drift, r)) / div_bound;
        on_plus.max(neg_div)
    };
    let ratios: Vec<f64> = nodes.iter().map(|&r| ratio(r)).collect();
    let k = ratios.iter().copied().fold(0.0, f64::max);
    if !k.is_finite() {
        return Err(Error::input(format!("{} drift ratio is not finite on the grid", hypothesis.label())));
    }

    let (pass, reported_exponent) = match exponent {
        Some(s) => (s <= limit, Some(s)),
        None => {
            let tail = tail_growth_exponent(nodes, &ratios);
            let fitted_sigma = tail.map(|g| sigma + g);
            (tail.map_or(true, |g| g <= GROWTH_SLACK), fitted_sigma)
        }
    };

    let witnesses = if pass {
        Vec::new()
    } else {
        growth_witness(manifold, drift, hypothesis, grid, limit)
    };

    Ok(HypothesisReport {
        hypothesis,
        pass,
        constants: FittedConstants {
            k: Some(k),
            k_certified: Some(k * SAFETY_INFLATION),
            sigma: if pass { Some(sigma) } else { None },
            theta,
            ..Default::default()
        },
        exponent: reported_exponent,
        exponent_fitted: fitted,
        witnesses,
    })
}

/// For a failed growth bound: calibrates the constant on the inner decade of
/// the grid at the largest admissible exponent and reports where the outer
/// part exceeds it.
fn growth_witness(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    hypothesis: Hypothesis,
    grid: &HypothesisGrid,
    limit: f64,
) -> Vec<Witness> {
    let inner_edge = grid.r_max() / 10.0;
    let nodes = grid.nodes();
    let calibrate = nodes.iter().take_while(|&&r| r <= inner_edge);
    let mut k_inner: f64 = 0.0;
    for &r in calibrate {
        let (drift_bound, div_bound) = bounds(hypothesis, limit, r);
        let b = drift.value(r);
        if b > 0.0 {
            k_inner = k_inner.max(b / drift_bound);
        }
        k_inner = k_inner.max(negative_part(divergence_unchecked(manifold, drift, r)) / div_bound);
    }
    let candidates = check_bound(manifold, drift, hypothesis, grid, limit, k_inner);
    let worst = candidates
        .into_iter()
        .max_by(|a, b| a.violation().total_cmp(&b.violation()));
    match worst {
        Some(w) => vec![w],
        None => {
            // the grid is too short to exhibit the asymptotic violation
            let r = grid.r_max();
            let (drift_bound, _) = bounds(hypothesis, limit, r);
            vec![Witness {
                r,
                inequality: drift_inequality(hypothesis),
                lhs: drift.value(r),
                rhs: k_inner * drift_bound,
            }]
        }
    }
}

/// Exponent of growth of the running maximum of `values` over the last
/// decade of `nodes`, by log-log regression against `1 + r`.
fn tail_growth_exponent(nodes: &[f64], values: &[f64]) -> Option<f64> {
    let r_max = nodes[nodes.len() - 1];
    let start = nodes.partition_point(|&r| r < r_max / 10.0);
    let mut running = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &v in &values[..start] {
        running = running.max(v);
    }
    for (&r, &v) in nodes[start..].iter().zip(&values[start..]) {
        running = running.max(v);
        if running > 0.0 {
            xs.push((1.0 + r).ln());
            ys.push(running.ln());
        }
    }
    if xs.len() < 4 {
        return None;
    }
    Some(linear_fit(&xs, &ys).1)
}

fn check_potential(potential: &PotentialC, grid: &HypothesisGrid) -> HypothesisReport {
    let mut inf = f64::INFINITY;
    let mut witnesses = Vec::new();
    let floor = potential.floor();
    for &r in grid.nodes() {
        let c = potential.value(r);
        inf = inf.min(c);
        if c < floor {
            witnesses.push(Witness {
                r,
                inequality: "c(r) >= c0".into(),
                lhs: c,
                rhs: floor,
            });
        }
    }
    let pass = inf > 0.0 && witnesses.is_empty();
    if !pass && witnesses.is_empty() {
        let r = grid.nodes()[0];
        witnesses.push(Witness {
            r,
            inequality: "c(r) > 0".into(),
            lhs: potential.value(r),
            rhs: 0.0,
        });
    }
    witnesses.sort_by(|a, b| a.lhs.total_cmp(&b.lhs));
    witnesses.truncate(1);
    HypothesisReport {
        hypothesis: Hypothesis::H3,
        pass,
        constants: FittedConstants {
            c0: Some(inf),
            ..Default::default()
        },
        exponent: None,
        exponent_fitted: false,
        witnesses,
    }
}

/// Exponents tried for witnesses of a failed sharpness condition.
const SHARPNESS_WITNESS_SIGMAS: [f64; 8] = [1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0];
const SHARPNESS_LADDER: usize = 32;

fn check_sharpness(drift: &RadialDrift, grid: &HypothesisGrid) -> HypothesisReport {
    let nodes = grid.nodes();
    let values: Vec<f64> = nodes.iter().map(|&r| drift.value(r)).collect();
    let fail = |witnesses: Vec<Witness>, exponent: Option<f64>, fitted: bool| HypothesisReport {
        hypothesis: Hypothesis::S22,
        pass: false,
        constants: FittedConstants::default(),
        exponent,
        exponent_fitted: fitted,
        witnesses,
    };

    if let Some((i, _)) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < 0.0)
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return fail(
            vec![Witness {
                r: nodes[i],
                inequality: "<b, grad r> >= 0".into(),
                lhs: values[i],
                rhs: 0.0,
            }],
            None,
            false,
        );
    }

    let (exponent, fitted) = match drift.growth_exponent() {
        GrowthExponent::Exact(s) => (Some(s), false),
        GrowthExponent::Vanishing => (None, false),
        GrowthExponent::Unknown => (tail_growth_exponent(nodes, &values), true),
    };
    let s = match exponent {
        Some(s) if s > 1.0 => s,
        _ => return fail(vec![sharpness_exponent_witness(nodes, &values)], exponent, fitted),
    };

    let outer: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i] > 1.0).collect();
    let r0_cap = grid.r_max() / 4.0;
    let threshold = 1.0 + WITNESS_MARGIN;
    for j in 0..SHARPNESS_LADDER {
        let sigma = s - (s - 1.0) * j as f64 / SHARPNESS_LADDER as f64;
        let ratios: Vec<f64> = outer.iter().map(|&i| values[i] / nodes[i].powf(sigma)).collect();
        let mut suffix_min = ratios.clone();
        for k in (0..suffix_min.len().saturating_sub(1)).rev() {
            suffix_min[k] = suffix_min[k].min(suffix_min[k + 1]);
        }
        let found = outer
            .iter()
            .zip(&suffix_min)
            .find(|(&i, &m)| nodes[i] <= r0_cap && m >= threshold);
        if let Some((&i, &m)) = found {
            return HypothesisReport {
                hypothesis: Hypothesis::S22,
                pass: true,
                constants: FittedConstants {
                    k: Some(m),
                    k_certified: Some(m),
                    sigma: Some(sigma),
                    r0: Some(nodes[i]),
                    ..Default::default()
                },
                exponent: Some(s),
                exponent_fitted: fitted,
                witnesses: Vec::new(),
            };
        }
    }

    // no exponent above 1 admits a constant above 1 before R_max/4
    let sigma = 1.0 + (s - 1.0) / SHARPNESS_LADDER as f64;
    let worst = outer
        .iter()
        .filter(|&&i| nodes[i] >= r0_cap)
        .min_by(|&&a, &&b| (values[a] / nodes[a].powf(sigma)).total_cmp(&(values[b] / nodes[b].powf(sigma))))
        .copied()
        .unwrap_or(nodes.len() - 1);
    fail(
        vec![Witness {
            r: nodes[worst],
            inequality: format!("<b, grad r> >= K r^{sigma:.4} with K > 1"),
            lhs: values[worst],
            rhs: nodes[worst].powf(sigma),
        }],
        exponent,
        fitted,
    )
}

/// Witness for a drift whose growth exponent does not exceed 1: every
/// `σ > 1` eventually fails, so report the first exponent on a fixed ladder
/// for which the grid exhibits `b_r < r^σ` by at least 1%.
fn sharpness_exponent_witness(nodes: &[f64], values: &[f64]) -> Witness {
    for sigma in SHARPNESS_WITNESS_SIGMAS {
        let hit = nodes
            .iter()
            .zip(values)
            .filter(|(r, _)| **r > 1.0)
            .find(|(r, b)| **b <= (1.0 - WITNESS_MARGIN) * r.powf(sigma));
        if let Some((&r, &b)) = hit {
            return Witness {
                r,
                inequality: format!("<b, grad r> >= K r^{sigma} with K >= 1"),
                lhs: b,
                rhs: r.powf(sigma),
            };
        }
    }
    let r = nodes[nodes.len() - 1];
    let b = values[values.len() - 1];
    Witness {
        r,
        inequality: "<b, grad r> >= K r^3 with K >= 1".into(),
        lhs: b,
        rhs: r.powi(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpingFunction;

    fn e(n: usize) -> ModelManifold {
        ModelManifold::euclidean(n).unwrap()
    }

    fn unit_c() -> PotentialC {
        PotentialC::constant(1.0).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let id = RadialDrift::closed_form("r", |r| r, |_| 1.0).unwrap();
        assert!((divergence(&e(3), &id, 5.0).unwrap() - 3.0).abs() < 1e-14);

        let pow = RadialDrift::closed_form("2r^2", |r| 2.0 * r * r, |r| 4.0 * r).unwrap();
        assert!((divergence(&e(3), &pow, 1.0).unwrap() - 8.0).abs() < 1e-14);

        let sine = RadialDrift::closed_form("sin", f64::sin, f64::cos).unwrap();
        let v = divergence(&e(2), &sine, std::f64::consts::PI).unwrap();
        assert!((v + 1.0).abs() < 1e-14);

        assert!(matches!(divergence(&e(3), &id, 0.0), Err(Error::PoleSingularity { .. })));
        assert_eq!(divergence_at_pole(&e(3), &id), 3.0);
    }

    #[test]
    fn power_affine_derivative_matches_finite_differences() {
        for (a, s, o) in [(2.0, 2.0, 0.0), (2.0, 1.0, 1.0), (0.5, 1.5, 1.0), (-1.0, 0.5, 2.0), (3.0, -0.5, 1.0)] {
            let b = RadialDrift::power_affine(a, s, o).unwrap();
            for r in [0.3, 1.0, 7.5, 40.0] {
                let h = 1e-5 * (1.0 + r);
                let fd = (b.value(r + h) - b.value(r - h)) / (2.0 * h);
                assert!((fd - b.derivative(r)).abs() <= 1e-6 * (1.0 + fd.abs()), "{a} {s} {o} {r}");
            }
            assert_eq!(b.value(0.0), 0.0);
        }
        assert!(RadialDrift::power_affine(1.0, -1.0, 0.0).is_err());
        assert!(RadialDrift::closed_form("bad", |r| r + 1.0, |_| 1.0).is_err());
    }

    #[test]
    fn pole_derivative() {
        assert_eq!(RadialDrift::power_affine(2.0, 2.0, 0.0).unwrap().derivative_at_pole(), 0.0);
        assert_eq!(RadialDrift::power_affine(2.0, 1.0, 1.0).unwrap().derivative_at_pole(), 2.0);
        assert_eq!(RadialDrift::power_affine(3.0, 0.0, 0.0).unwrap().derivative_at_pole(), 3.0);
        assert_eq!(RadialDrift::power_affine(2.0, 2.0, 3.0).unwrap().derivative_at_pole(), 18.0);
    }

    #[test]
    fn linear_drift_passes_h2_and_fails_h0() {
        let grid = HypothesisGrid::default();
        let b = RadialDrift::power_affine(2.0, 1.0, 1.0).unwrap();
        assert!((b.value(3.0) - 6.0).abs() < 1e-14);
        let h2 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::H2, &grid).unwrap();
        assert!(h2.pass);
        assert_eq!(h2.constants.sigma, Some(1.0));
        let k = h2.constants.k.unwrap();
        assert!(k < 2.0 && k > 1.99, "{k}");

        let h0 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::H0, &grid).unwrap();
        assert!(!h0.pass);
        assert_eq!(h0.witnesses.len(), 1);
        assert!(h0.witnesses[0].r > grid.r_max() / 10.0);
        assert!(h0.witnesses[0].violation() >= WITNESS_MARGIN);
    }

    #[test]
    fn bounded_oscillating_drift_passes_h0() {
        let grid = HypothesisGrid::default();
        let b = RadialDrift::closed_form(
            "sin(r) r/(1+r)",
            |r| r.sin() * r / (1.0 + r),
            |r| r.cos() * r / (1.0 + r) + r.sin() / ((1.0 + r) * (1.0 + r)),
        )
        .unwrap();
        let report = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::H0, &grid).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.exponent_fitted);

        // grid-sup oracle, computed independently
        let mut sup_plus: f64 = 0.0;
        let mut sup_div: f64 = 0.0;
        for &r in grid.nodes() {
            let v = r.sin() * r / (1.0 + r);
            if v > 0.0 {
                sup_plus = sup_plus.max(v);
            }
            if r > 0.0 {
                let dv = r.cos() * r / (1.0 + r) + r.sin() / ((1.0 + r) * (1.0 + r));
                sup_div = sup_div.max((-(dv + 2.0 / r * v)).max(0.0));
            }
        }
        let expected = sup_plus.max(sup_div);
        assert!((report.constants.k.unwrap() - expected).abs() < 1e-12);
        assert!(expected >= 0.99);
    }

    #[test]
    fn quadratic_drift_passes_sharpness_and_fails_h2() {
        let grid = HypothesisGrid::default();
        let b = RadialDrift::power_affine(2.0, 2.0, 0.0).unwrap();
        let s22 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::S22, &grid).unwrap();
        assert!(s22.pass);
        assert_eq!(s22.constants.sigma, Some(2.0));
        let r0 = s22.constants.r0.unwrap();
        assert!(r0 > 1.0 && r0 < 2.5, "{r0}");
        assert!(s22.constants.k.unwrap() > 1.0);
        // inf over r >= R0 of b/r^2 = 2 R0/(1+R0)
        assert!((s22.constants.k.unwrap() - 2.0 * r0 / (1.0 + r0)).abs() < 1e-12);

        let h2 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::H2, &grid).unwrap();
        assert!(!h2.pass);
        assert!(h2.witnesses[0].violation() >= WITNESS_MARGIN);
    }

    #[test]
    fn zero_drift() {
        let grid = HypothesisGrid::default();
        let z = RadialDrift::zero();
        for h in [Hypothesis::H0, Hypothesis::H1 { theta: 0.5 }, Hypothesis::H2] {
            let rep = check_hypothesis(&e(2), &z, &unit_c(), h, &grid).unwrap();
            assert!(rep.pass);
            assert_eq!(rep.constants.k, Some(0.0));
        }
        let s22 = check_hypothesis(&e(2), &z, &unit_c(), Hypothesis::S22, &grid).unwrap();
        assert!(!s22.pass);
        assert!(!s22.witnesses.is_empty());
    }

    #[test]
    fn inward_drift_fails_sharpness_with_sign_witness() {
        let grid = HypothesisGrid::default();
        let b = RadialDrift::power_affine(-1.0, 1.0, 1.0).unwrap();
        let s22 = check_hypothesis(&e(2), &b, &unit_c(), Hypothesis::S22, &grid).unwrap();
        assert!(!s22.pass);
        assert!(s22.witnesses[0].lhs < 0.0);
        // D+ is empty; only the divergence bound matters: div b = -2 for N = 2
        let h2 = check_hypothesis(&e(2), &b, &unit_c(), Hypothesis::H2, &grid).unwrap();
        assert!(h2.pass);
        assert!((h2.constants.k.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn h1_respects_theta() {
        let grid = HypothesisGrid::default();
        let b = RadialDrift::power_affine(1.0, 0.5, 1.0).unwrap();
        let m = e(2);
        assert!(check_hypothesis(&m, &b, &unit_c(), Hypothesis::H1 { theta: 0.5 }, &grid).unwrap().pass);
        let tight = check_hypothesis(&m, &b, &unit_c(), Hypothesis::H1 { theta: 0.7 }, &grid).unwrap();
        assert!(!tight.pass);
        assert!(!tight.witnesses.is_empty());
        assert!(check_hypothesis(&m, &b, &unit_c(), Hypothesis::H1 { theta: 1.5 }, &grid).is_err());
    }

    #[test]
    fn sampled_drift_uses_fitted_exponent() {
        let grid = HypothesisGrid::default();
        let pts: Vec<(f64, f64)> = grid.nodes().iter().step_by(4).map(|&r| (r, 2.0 * r * r * r / (1.0 + r))).collect();
        let b = RadialDrift::sampled(&pts).unwrap();
        let s22 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::S22, &grid).unwrap();
        assert!(s22.pass);
        assert!(s22.exponent_fitted);
        assert!((s22.exponent.unwrap() - 2.0).abs() < 0.05);
        let h2 = check_hypothesis(&e(3), &b, &unit_c(), Hypothesis::H2, &grid).unwrap();
        assert!(!h2.pass && h2.exponent_fitted);
    }

    #[test]
    fn potential_floor() {
        let grid = HypothesisGrid::default();
        let c = PotentialC::polynomial(vec![1.0, 0.0, 1.0], 1.0).unwrap();
        let rep = check_hypothesis(&e(2), &RadialDrift::zero(), &c, Hypothesis::H3, &grid).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.constants.c0, Some(1.0));

        let wrong = PotentialC::polynomial(vec![1.0, -0.01], 0.5).unwrap();
        let rep = check_hypothesis(&e(2), &RadialDrift::zero(), &wrong, Hypothesis::H3, &grid).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.witnesses.len(), 1);
        assert!(PotentialC::constant(0.0).is_err());
    }

    #[test]
    fn grid_preconditions() {
        assert!(matches!(HypothesisGrid::standard(50.0, 2000), Err(Error::InsufficientGrid(_))));
        assert!(matches!(HypothesisGrid::standard(200.0, 100), Err(Error::InsufficientGrid(_))));
        assert!(HypothesisGrid::from_nodes((0..2000).map(|i| i as f64 * 0.01).collect()).is_err());
        let g = HypothesisGrid::standard(100.0, 1000).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.r_max(), 100.0);
        assert_eq!(g.nodes().len(), 1000);
    }

    #[test]
    fn hyperbolic_divergence_identity() {
        let m = ModelManifold::new(3, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let b = RadialDrift::power_affine(1.0, 0.0, 1.0).unwrap();
        // φ^{1-N} (φ^{N-1} b)' by central differences
        for r in [0.5, 2.0, 6.0] {
            let g = |t: f64| m.density(t) * b.value(t);
            let h = 1e-5;
            let fd = (g(r + h) - g(r - h)) / (2.0 * h) / m.density(r);
            assert!((fd - divergence(&m, &b, r).unwrap()).abs() < 1e-7);
        }
    }
}
