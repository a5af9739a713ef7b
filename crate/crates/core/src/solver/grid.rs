use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of intervals in a solver grid.
pub const MIN_INTERVALS: usize = 64;

/// Radius up to which graded grids are uniform.
pub const GRADING_KNEE: f64 = 2.0;

/// Largest ratio between the last and first spacing of a graded grid.
pub const GRADING_SPREAD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// Uniform on `[0, 2]`, geometric beyond.
    Graded,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    /// `nodes` equally spaced points on `[0, r_max]`.
    pub fn uniform(r_max: f64, nodes: usize) -> Result<Self> {
        check_extent(r_max, nodes)?;
        let n = nodes - 1;
        let h = r_max / n as f64;
        let mut v: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        v.push(r_max);
        Ok(Self {
            nodes: v,
            spacing: Spacing::Uniform,
        })
    }

    /// Uniform on `[0, 2]`, then geometric up to `r_max` with the last
    /// spacing at most ten times the uniform one. Falls back to a uniform
    /// grid when that is at least as fine near the pole.
    pub fn graded(r_max: f64, nodes: usize) -> Result<Self> {
        check_extent(r_max, nodes)?;
        let n = nodes - 1;
        let outer = r_max - GRADING_KNEE;
        if outer <= 0.0 {
            return Self::uniform(r_max, nodes);
        }
        // largest number of inner intervals whose geometric continuation can
        // still reach r_max with the spread capped
        let reach = |m: usize| -> f64 {
            let h0 = GRADING_KNEE / m as f64;
            let k = (n - m) as f64;
            let q = GRADING_SPREAD.powf(1.0 / k);
            h0 * q * (GRADING_SPREAD - 1.0) / (q - 1.0)
        };
        let m = match (1..n).rev().find(|&m| reach(m) >= outer) {
            Some(m) => m,
            None => {
                return Err(Error::InsufficientGrid(format!(
                    "{nodes} nodes cannot reach R = {r_max} with spacing spread <= {GRADING_SPREAD}"
                )))
            }
        };
        let h0 = GRADING_KNEE / m as f64;
        let k = n - m;
        if h0 * k as f64 >= outer {
            return Self::uniform(r_max, nodes);
        }
        let span = |q: f64| h0 * q * (q.powi(k as i32) - 1.0) / (q - 1.0);
        let (mut lo, mut hi) = (1.0 + 1e-15, GRADING_SPREAD.powf(1.0 / k as f64));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if span(mid) < outer {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = 0.5 * (lo + hi);
        let mut v: Vec<f64> = (0..=m).map(|i| i as f64 * h0).collect();
        *v.last_mut().unwrap() = GRADING_KNEE;
        let mut r = GRADING_KNEE;
        let mut h = h0;
        for _ in 0..k {
            h *= q;
            r += h;
            v.push(r);
        }
        *v.last_mut().unwrap() = r_max;
        Self::checked(v, Spacing::Graded)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::checked(nodes, Spacing::Custom)
    }

    fn checked(nodes: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if nodes.len() < MIN_INTERVALS + 1 {
            return Err(Error::InsufficientGrid(format!(
                "need at least {} nodes, got {}",
                MIN_INTERVALS + 1,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InsufficientGrid("grid must start at the pole".into()));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InsufficientGrid("grid must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes, spacing })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn describe(&self) -> String {
        format!("{:?}(n={}, R={})", self.spacing, self.nodes.len(), self.r_max())
    }
}

fn check_extent(r_max: f64, nodes: usize) -> Result<()> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::input(format!("truncation radius must be positive, got {r_max}")));
    }
    if nodes < MIN_INTERVALS + 1 {
        return Err(Error::InsufficientGrid(format!(
            "need at least {} nodes, got {nodes}",
            MIN_INTERVALS + 1
        )));
    }
    Ok(())
}
