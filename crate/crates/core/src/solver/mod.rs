//! Truncated radial boundary-value problems
//! `u'' + ((N-1)φ'/φ + b_r) u' - c u = 0` on `[0, R]`, `u'(0) = 0`, `u(R) = γ`.

mod fd;
mod grid;
mod shoot;
mod supersolution;

pub use fd::{solve_bvp, solve_bvp_with, SolveOptions};
pub use grid::{RadialGrid, Spacing, GRADING_KNEE, GRADING_SPREAD, MIN_INTERVALS};
pub use shoot::{shoot_oracle, shoot_oracle_with, ShootOptions};
pub use supersolution::{verify_supersolution, Supersolution, SupersolutionReport};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::{PotentialC, RadialDrift};
use crate::geometry::ModelManifold;

#[derive(Debug, Clone)]
pub struct BVPProblem {
    pub manifold: ModelManifold,
    pub drift: RadialDrift,
    pub potential: PotentialC,
    pub gamma: f64,
    pub r_max: f64,
}

impl BVPProblem {
    pub fn new(
        manifold: ModelManifold,
        drift: RadialDrift,
        potential: PotentialC,
        gamma: f64,
        r_max: f64,
    ) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::input(format!("truncation radius must be positive, got {r_max}")));
        }
        if !gamma.is_finite() {
            return Err(Error::input(format!("boundary value must be finite, got {gamma}")));
        }
        Ok(Self {
            manifold,
            drift,
            potential,
            gamma,
            r_max,
        })
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn with_radius(&self, r_max: f64) -> Result<Self> {
        Self::new(
            self.manifold.clone(),
            self.drift.clone(),
            self.potential.clone(),
            self.gamma,
            r_max,
        )
    }

    /// First-order coefficient `(N-1)φ'/φ + b_r` at `r > 0`.
    pub fn advection(&self, r: f64) -> f64 {
        self.manifold.laplacian_coeff_unchecked(r) + self.drift.value(r)
    }

    pub fn describe(&self) -> String {
        format!(
            "manifold[{}] drift[{}] potential[{}] gamma={} R={}",
            self.manifold.describe(),
            self.drift.describe(),
            self.potential.describe(),
            self.gamma,
            self.r_max
        )
    }

    /// Hex SHA-256 of [`describe`](Self::describe).
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.describe().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FiniteDifference,
    Shooting,
}

/// Discrete solution with `u(R) = γ` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    grid: RadialGrid,
    values: Vec<f64>,
    gamma: f64,
    residual: f64,
    problem_hash: String,
    method: Method,
}

impl SolutionGrid {
    pub(crate) fn assemble(problem: &BVPProblem, grid: RadialGrid, mut values: Vec<f64>, method: Method) -> Self {
        *values.last_mut().expect("grid is nonempty") = problem.gamma;
        let residual = residual_on(&problem.manifold, &problem.drift, &problem.potential, &grid, &values);
        Self {
            grid,
            values,
            gamma: problem.gamma,
            residual,
            problem_hash: problem.hash(),
            method,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary_value(&self) -> f64 {
        self.gamma
    }

    /// Sup-norm of the operator over interior nodes, see [`residual`].
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn problem_hash(&self) -> &str {
        &self.problem_hash
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic Lagrange interpolation through the four nodes around `r`.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        let xs = self.grid.nodes();
        if !(r >= 0.0 && r <= self.grid.r_max()) {
            return Err(Error::input(format!(
                "probe radius {r} outside the grid [0, {}]",
                self.grid.r_max()
            )));
        }
        let n = xs.len();
        let k = xs.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        if xs[k] == r {
            return Ok(self.values[k]);
        }
        let start = k.saturating_sub(1).min(n - 4);
        let mut total = 0.0;
        for i in start..start + 4 {
            let mut l = 1.0;
            for j in start..start + 4 {
                if j != i {
                    l *= (r - xs[j]) / (xs[i] - xs[j]);
                }
            }
            total += l * self.values[i];
        }
        Ok(total)
    }

    /// Largest node-wise absolute difference to another solution on the same grid.
    pub fn sup_distance(&self, other: &SolutionGrid) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::input("solutions live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Sup-norm over interior nodes of `u'' + ((N-1)φ'/φ + b_r)u' - c u`, with
/// derivatives from five-point (fourth-order) stencils on the node values.
/// Because the stencils are of higher order than the discretization, the
/// value measures how far the discrete solution is from a classical one.
pub fn residual(manifold: &ModelManifold, drift: &RadialDrift, potential: &PotentialC, u: &SolutionGrid) -> f64 {
    residual_on(manifold, drift, potential, &u.grid, &u.values)
}

fn residual_on(
    manifold: &ModelManifold,
    drift: &RadialDrift,
    potential: &PotentialC,
    grid: &RadialGrid,
    values: &[f64],
) -> f64 {
    let xs = grid.nodes();
    let n = xs.len();
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let r = xs[i];
        let w = fornberg_weights(r, &xs[i - 2..=i + 2], 2);
        let (mut d1, mut d2) = (0.0, 0.0);
        for j in 0..5 {
            d1 += w[1][j] * values[i - 2 + j];
            d2 += w[2][j] * values[i - 2 + j];
        }
        let b = manifold.laplacian_coeff_unchecked(r) + drift.value(r);
        let op = d2 + b * d1 - potential.value(r) * values[i];
        worst = worst.max(op.abs());
    }
    worst
}

/// Finite-difference weights for derivatives `0..=m` at `z` on nodes `x`.
pub(crate) fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
