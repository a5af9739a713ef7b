//! Rotationally symmetric model manifolds `[0, ∞) × S^{N-1}` with metric
//! `dr² + φ(r)² dθ²`.
//!
//! Everything the radial problems need is a function of the warping profile
//! `φ`: the first-order coefficient of the Laplacian `(N-1) φ'/φ`, the volume
//! density `φ^{N-1}` and, through it, the volume of geodesic balls about the
//! pole.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::Quadrature;

/// Radii at which `φ(r)/r ≈ 1` is checked for sampled profiles.
const POLE_PROBES: [f64; 2] = [1e-6, 1e-4];
const POLE_TOLERANCE: f64 = 1e-3;

/// Maximum deviation of `log V` from a fitted growth model for the model to
/// count as a fit.
pub const GROWTH_FIT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum WarpingFunction {
    /// `φ(r) = r`
    Euclidean,
    /// `φ(r) = sinh(√k r)/√k`, sectional curvature `-k`.
    Hyperbolic { curvature: f64 },
    /// `φ(r) = r (1+r)^{λ-1}`, which behaves like `r^λ` at infinity.
    PowerLaw { lambda: f64 },
    /// Monotone cubic interpolant through `(r, φ(r))` samples starting at the
    /// pole.
    Sampled(MonotoneCubic),
}

impl WarpingFunction {
    pub fn hyperbolic(curvature: f64) -> Result<Self> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::input(format!("hyperbolic curvature must be positive, got {curvature}")));
        }
        Ok(WarpingFunction::Hyperbolic { curvature })
    }

    pub fn power_law(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!("power-law exponent must be >= 0, got {lambda}")));
        }
        Ok(WarpingFunction::PowerLaw { lambda })
    }

    /// Builds a sampled profile. The samples must start at `(0, 0)`, stay
    /// positive afterwards and satisfy `φ'(0) = 1` to within `1e-3`.
    pub fn sampled(samples: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if xs.first() != Some(&0.0) || ys.first() != Some(&0.0) {
            return Err(Error::input("sampled warping must start with the pole sample (0, 0)"));
        }
        if ys.iter().skip(1).any(|&y| y <= 0.0) {
            return Err(Error::input("sampled warping must be positive away from the pole"));
        }
        let w = WarpingFunction::Sampled(MonotoneCubic::new(xs, ys)?);
        w.check_pole_conditions()?;
        Ok(w)
    }

    /// `φ(r)` for `r >= 0`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Euclidean => r,
            WarpingFunction::Hyperbolic { curvature } => {
                let s = curvature.sqrt();
                (s * r).sinh() / s
            }
            WarpingFunction::PowerLaw { lambda } => r * (1.0 + r).powf(lambda - 1.0),
            WarpingFunction::Sampled(p) => p.eval(r),
        }
    }

    /// `φ'(r)` for `r >= 0`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Euclidean => 1.0,
            WarpingFunction::Hyperbolic { curvature } => (curvature.sqrt() * r).cosh(),
            WarpingFunction::PowerLaw { lambda } => {
                (1.0 + r).powf(lambda - 2.0) * (1.0 + lambda * r)
            }
            WarpingFunction::Sampled(p) => p.eval_with_derivative(r).1,
        }
    }

    /// `φ'(r)/φ(r)` for `r > 0`, evaluated in a form that stays finite where
    /// `φ` itself overflows.
    pub fn log_derivative(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Euclidean => 1.0 / r,
            WarpingFunction::Hyperbolic { curvature } => {
                let s = curvature.sqrt();
                s / (s * r).tanh()
            }
            WarpingFunction::PowerLaw { lambda } => (1.0 + lambda * r) / (r * (1.0 + r)),
            WarpingFunction::Sampled(p) => {
                let (v, d) = p.eval_with_derivative(r);
                d / v
            }
        }
    }

    /// `φ(0) = 0`, `φ'(0) = 1` and `φ > 0` near the pole, checked numerically.
    pub fn check_pole_conditions(&self) -> Result<()> {
        if self.value(0.0).abs() > 1e-12 {
            return Err(Error::input(format!("warping must vanish at the pole, φ(0) = {}", self.value(0.0))));
        }
        for r in POLE_PROBES {
            let ratio = self.value(r) / r;
            if !((ratio - 1.0).abs() <= POLE_TOLERANCE) {
                return Err(Error::input(format!(
                    "warping violates φ'(0) = 1: φ({r:e})/{r:e} = {ratio}"
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            WarpingFunction::Euclidean => "euclidean".into(),
            WarpingFunction::Hyperbolic { curvature } => format!("hyperbolic(k={curvature})"),
            WarpingFunction::PowerLaw { lambda } => format!("power_law(lambda={lambda})"),
            WarpingFunction::Sampled(p) => {
                let (a, b) = p.domain();
                let checksum: f64 = p.ys().iter().sum();
                format!("sampled(n={}, [{a}, {b}], sum={checksum:e})", p.xs().len())
            }
        }
    }
}

/// Surface area of the unit sphere `S^{N-1}`, `2π^{N/2}/Γ(N/2)`.
pub fn sphere_constant(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(2.0 * PI.powf(dim as f64 / 2.0) / gamma_half_integer(dim))
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half_integer(n: usize) -> f64 {
    let (mut value, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    dim: usize,
    warping: WarpingFunction,
}

impl ModelManifold {
    pub fn new(dim: usize, warping: WarpingFunction) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        warping.check_pole_conditions()?;
        Ok(Self { dim, warping })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, WarpingFunction::Euclidean)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    /// `(N-1) φ'/φ`, the first-order coefficient of the radial Laplacian.
    pub fn radial_laplacian_coeff(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::PoleSingularity {
                what: "radial Laplacian coefficient",
            });
        }
        Ok(self.laplacian_coeff_unchecked(r))
    }

    pub(crate) fn laplacian_coeff_unchecked(&self, r: f64) -> f64 {
        let n1 = (self.dim - 1) as f64;
        match self.warping {
            WarpingFunction::Euclidean => n1 / r,
            _ => n1 * self.warping.log_derivative(r),
        }
    }

    /// Volume density `φ^{N-1}(r)` with respect to `dr dθ`.
    pub fn density(&self, r: f64) -> f64 {
        self.warping.value(r).powi(self.dim as i32 - 1)
    }

    /// Volume of the geodesic ball of radius `r` about the pole.
    pub fn volume(&self, r: f64, quad: &Quadrature) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::input(format!("radius must be >= 0, got {r}")));
        }
        let c_n = sphere_constant(self.dim)?;
        let integral = quad.integrate(|t| self.density(t), 0.0, r).map_err(|e| match e {
            Error::ToleranceNotMet {
                best,
                tol,
                evaluations,
            } => Error::ToleranceNotMet {
                best: c_n * best,
                tol,
                evaluations,
            },
            other => other,
        })?;
        Ok(c_n * integral)
    }

    pub fn describe(&self) -> String {
        format!("N={} {}", self.dim, self.warping.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    /// `V ≲ r^α`
    Polynomial { alpha: f64 },
    /// `V ≲ exp(α r^θ)`, `0 < θ < 1`
    StretchedExponential { alpha: f64, theta: f64 },
    /// `V ≲ exp(α r)`
    Exponential { alpha: f64 },
    SuperExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: &'static str,
    /// Model parameters: `(log C, α)` for polynomial and exponential fits,
    /// `(α, θ)` for the stretched exponential.
    pub params: (f64, f64),
    /// Max deviation of `log V` (`log log V` for the stretched exponential)
    /// from the fitted model over the window.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub class: GrowthClass,
    pub fits: Vec<GrowthFit>,
    /// Radii the fits were computed on (the upper half of the samples, in
    /// geometric terms).
    pub window: Vec<f64>,
    pub volumes: Vec<f64>,
}

/// Classifies the growth of `V(o, r)` by regression over the large radii of
/// `radii`. Polynomial and exponential models are fitted to `log V`, the
/// stretched exponential to `log log V`; the smallest class whose residual is
/// within [`GROWTH_FIT_TOLERANCE`] is reported.
pub fn classify_volume_growth(manifold: &ModelManifold, radii: &[f64]) -> Result<GrowthReport> {
    if radii.len() < 8 {
        return Err(Error::input(format!("need at least 8 radii, got {}", radii.len())));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("radii must be positive and strictly increasing"));
    }
    let r_max = radii[radii.len() - 1];
    if r_max < 10.0 {
        return Err(Error::input(format!("largest radius must be >= 10, got {r_max}")));
    }

    let quad = Quadrature::default();
    let volumes = radii
        .iter()
        .map(|&r| manifold.volume(r, &quad))
        .collect::<Result<Vec<_>>>()?;
    if volumes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inconsistent("volume overflowed on the sample radii".into()));
    }
    if volumes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Inconsistent("volume samples are not strictly increasing".into()));
    }

    let cutoff = (radii[0] * r_max).sqrt();
    let mut start = radii.partition_point(|&r| r < cutoff);
    start = start.min(radii.len() - 4);
    let rs = &radii[start..];
    let log_v: Vec<f64> = volumes[start..].iter().map(|v| v.ln()).collect();
    let log_r: Vec<f64> = rs.iter().map(|r| r.ln()).collect();

    let mut fits = Vec::new();

    let (c, alpha) = linear_fit(&log_r, &log_v);
    let residual = max_deviation(&log_v, log_r.iter().map(|x| c + alpha * x));
    fits.push(GrowthFit {
        model: "polynomial",
        params: (c, alpha),
        residual,
    });
    if residual <= GROWTH_FIT_TOLERANCE {
        return Ok(report(GrowthClass::Polynomial { alpha }, fits, rs, &volumes));
    }

    let (c, alpha) = linear_fit(rs, &log_v);
    let residual = max_deviation(&log_v, rs.iter().map(|r| c + alpha * r));
    fits.push(GrowthFit {
        model: "exponential",
        params: (c, alpha),
        residual,
    });
    let exponential = residual <= GROWTH_FIT_TOLERANCE;

    // log log V ≈ log α + θ log r; the residual is measured on that line so
    // that lower-order factors of V do not spoil the fit
    if !exponential && log_v.iter().all(|&l| l > 0.0) {
        let loglog: Vec<f64> = log_v.iter().map(|l| l.ln()).collect();
        let (ln_alpha, theta) = linear_fit(&log_r, &loglog);
        let residual = max_deviation(&loglog, log_r.iter().map(|x| ln_alpha + theta * x));
        let alpha = ln_alpha.exp();
        fits.push(GrowthFit {
            model: "stretched_exponential",
            params: (alpha, theta),
            residual,
        });
        if residual <= GROWTH_FIT_TOLERANCE && theta > 0.0 && theta < 1.0 {
            return Ok(report(
                GrowthClass::StretchedExponential { alpha, theta },
                fits,
                rs,
                &volumes,
            ));
        }
    }

    if exponential {
        return Ok(report(GrowthClass::Exponential { alpha }, fits, rs, &volumes));
    }
    Ok(report(GrowthClass::SuperExponential, fits, rs, &volumes))
}

fn report(class: GrowthClass, fits: Vec<GrowthFit>, window: &[f64], volumes: &[f64]) -> GrowthReport {
    GrowthReport {
        class,
        fits,
        window: window.to_vec(),
        volumes: volumes.to_vec(),
    }
}

/// Geometrically spaced radii `[1, r_max]` suitable for
/// [`classify_volume_growth`].
pub fn growth_radii(r_max: f64, count: usize) -> Vec<f64> {
    let q = r_max.powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| q.powi(i as i32)).collect()
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn max_deviation(ys: &[f64], model: impl Iterator<Item = f64>) -> f64 {
    ys.iter().zip(model).map(|(y, m)| (y - m).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert!((sphere_constant(2).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_constant(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert_eq!(sphere_constant(1), Err(Error::InvalidDimension(1)));
        assert_eq!(sphere_constant(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn sphere_constant_recursion() {
        // |S^{N+1}| = 2π/N |S^{N-1}|
        for n in 2..20 {
            let lhs = sphere_constant(n + 2).unwrap();
            let rhs = 2.0 * PI / n as f64 * sphere_constant(n).unwrap();
            assert!(((lhs - rhs) / rhs).abs() < 1e-13, "N = {n}");
        }
        assert!((sphere_constant(4).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn laplacian_coefficient_examples() {
        let m = ModelManifold::euclidean(3).unwrap();
        assert_eq!(m.radial_laplacian_coeff(2.0).unwrap(), 1.0);
        assert!(matches!(m.radial_laplacian_coeff(0.0), Err(Error::PoleSingularity { .. })));

        let h = ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let expected = 1f64.cosh() / 1f64.sinh();
        assert!((h.radial_laplacian_coeff(1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.313035).abs() < 1e-6);

        let p = ModelManifold::new(2, WarpingFunction::power_law(2.0).unwrap()).unwrap();
        let v = p.radial_laplacian_coeff(100.0).unwrap();
        assert!((v - 0.02).abs() / 0.02 < 0.02);
        // symbolic: φ = r(1+r) => φ'/φ = (1+2r)/(r(1+r))
        assert!((v - 201.0 / (100.0 * 101.0)).abs() < 1e-15);
    }

    #[test]
    fn euclidean_coefficient_times_r_is_dimension_minus_one() {
        for n in 2..6 {
            let m = ModelManifold::euclidean(n).unwrap();
            for r in [1e-3, 0.5, 7.0, 1e4] {
                let v = m.radial_laplacian_coeff(r).unwrap() * r;
                assert!((v - (n - 1) as f64).abs() <= 4.0 * f64::EPSILON * n as f64);
            }
        }
    }

    #[test]
    fn hyperbolic_coefficient_is_finite_far_out() {
        let h = ModelManifold::new(3, WarpingFunction::hyperbolic(4.0).unwrap()).unwrap();
        let v = h.radial_laplacian_coeff(1000.0).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn volumes_match_closed_forms() {
        let q = Quadrature::default();
        let e2 = ModelManifold::euclidean(2).unwrap();
        let e3 = ModelManifold::euclidean(3).unwrap();
        assert!((e2.volume(1.0, &q).unwrap() - PI).abs() / PI < 1e-10);
        let ball = 4.0 * PI / 3.0;
        assert!((e3.volume(1.0, &q).unwrap() - ball).abs() / ball < 1e-10);
        assert_eq!(e3.volume(0.0, &q).unwrap(), 0.0);

        let h = ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let exact = 2.0 * PI * (1f64.cosh() - 1.0);
        assert!((h.volume(1.0, &q).unwrap() - exact).abs() / exact < 1e-10);
        assert!((exact - 3.412276).abs() < 1e-6);
    }

    #[test]
    fn power_law_surrogate_satisfies_pole_conditions() {
        for lambda in [0.0, 0.5, 1.0, 2.0, 3.5] {
            let w = WarpingFunction::power_law(lambda).unwrap();
            w.check_pole_conditions().unwrap();
            assert!((w.derivative(0.0) - 1.0).abs() < 1e-15);
        }
        assert!(WarpingFunction::power_law(-1.0).is_err());
        assert!(WarpingFunction::hyperbolic(0.0).is_err());
    }

    #[test]
    fn sampled_warping_validation() {
        let good: Vec<(f64, f64)> = (0..50).map(|i| i as f64 * 0.02).map(|r| (r, r.sinh())).collect();
        let w = WarpingFunction::sampled(&good).unwrap();
        assert!((w.value(0.5) - 0.5f64.sinh()).abs() < 1e-5);
        assert!((w.derivative(0.5) - 0.5f64.cosh()).abs() < 1e-3);

        let doubled: Vec<(f64, f64)> = good.iter().map(|&(r, v)| (r, 2.0 * v)).collect();
        assert!(WarpingFunction::sampled(&doubled).is_err());
        let no_pole: Vec<(f64, f64)> = good[1..].to_vec();
        assert!(WarpingFunction::sampled(&no_pole).is_err());
    }

    #[test]
    fn growth_classes() {
        let radii = growth_radii(1e4, 32);
        let e3 = ModelManifold::euclidean(3).unwrap();
        match classify_volume_growth(&e3, &radii).unwrap().class {
            GrowthClass::Polynomial { alpha } => assert!((alpha - 3.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }

        let p = ModelManifold::new(3, WarpingFunction::power_law(2.0).unwrap()).unwrap();
        match classify_volume_growth(&p, &radii).unwrap().class {
            GrowthClass::Polynomial { alpha } => assert!((alpha - 5.0).abs() / 5.0 < 0.05),
            other => panic!("{other:?}"),
        }

        let h = ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let radii = growth_radii(100.0, 24);
        match classify_volume_growth(&h, &radii).unwrap().class {
            GrowthClass::Exponential { alpha } => assert!((alpha - 1.0).abs() < 0.01),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stretched_growth() {
        // φ = r exp(√(1+r) - 1), so log V ~ 2√r
        let mut samples = vec![(0.0, 0.0)];
        samples.extend((0..=400).map(|i| {
            let r = 10f64.powf(-7.0 + 11.0 * i as f64 / 400.0);
            (r, r * ((1.0 + r).sqrt() - 1.0).exp())
        }));
        let m = ModelManifold::new(3, WarpingFunction::sampled(&samples).unwrap()).unwrap();
        match classify_volume_growth(&m, &growth_radii(1e4, 32)).unwrap().class {
            GrowthClass::StretchedExponential { alpha, theta } => {
                assert!(theta > 0.4 && theta <= 0.5, "{theta}");
                assert!(alpha > 1.0 && alpha < 6.0, "{alpha}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_preconditions() {
        let e3 = ModelManifold::euclidean(3).unwrap();
        assert!(classify_volume_growth(&e3, &growth_radii(100.0, 7)).is_err());
        assert!(classify_volume_growth(&e3, &growth_radii(5.0, 10)).is_err());
        let mut bad = growth_radii(100.0, 10);
        bad.swap(3, 4);
        assert!(classify_volume_growth(&e3, &bad).is_err());
    }
}
