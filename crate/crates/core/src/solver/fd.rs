use super::{BVPProblem, Method, RadialGrid, SolutionGrid};
use crate::error::{Error, Result};

/// Cell Péclet number `|B| h` above which upwinding kicks in when enabled.
pub const PECLET_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// First-order upwind differences for the advection term in cells whose
    /// Péclet number exceeds [`PECLET_LIMIT`].
    pub upwind: bool,
}

/// Centered second-order finite differences with the pole row
/// `N u''(0) = c(0) u(0)` and `u(R) = γ`, solved by banded elimination.
pub fn solve_bvp(problem: &BVPProblem, grid: &RadialGrid) -> Result<SolutionGrid> {
    solve_bvp_with(problem, grid, SolveOptions::default())
}

pub fn solve_bvp_with(problem: &BVPProblem, grid: &RadialGrid, options: SolveOptions) -> Result<SolutionGrid> {
    if (grid.r_max() - problem.r_max).abs() > 1e-12 * problem.r_max {
        return Err(Error::input(format!(
            "grid ends at {} but the problem is truncated at {}",
            grid.r_max(),
            problem.r_max
        )));
    }
    let xs = grid.nodes();
    let n = xs.len();
    let unknowns = n - 1;
    let mut sub = vec![0.0; unknowns];
    let mut diag = vec![0.0; unknowns];
    let mut sup = vec![0.0; unknowns];
    let mut rhs = vec![0.0; unknowns];

    let c_at = |r: f64| -> Result<f64> {
        let c = problem.potential.value(r);
        if !c.is_finite() {
            return Err(Error::input(format!("potential is not finite at r = {r}")));
        }
        if c < 0.0 {
            return Err(Error::Discretization(format!(
                "potential is negative at r = {r}; the discrete problem may be singular"
            )));
        }
        Ok(c)
    };

    let dim = problem.manifold.dim() as f64;
    let h1 = xs[1];
    diag[0] = -2.0 * dim / (h1 * h1) - c_at(0.0)?;
    sup[0] = 2.0 * dim / (h1 * h1);

    for i in 1..unknowns {
        let r = xs[i];
        let hm = r - xs[i - 1];
        let hp = xs[i + 1] - r;
        let b = problem.advection(r);
        if !b.is_finite() {
            return Err(Error::input(format!("advection coefficient is not finite at r = {r}")));
        }
        let c = c_at(r)?;
        let s = hm + hp;
        let (mut lo, mut mid, mut hi) = (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s));
        if options.upwind && b.abs() * hm.max(hp) > PECLET_LIMIT {
            if b > 0.0 {
                mid -= b / hp;
                hi += b / hp;
            } else {
                lo -= b / hm;
                mid += b / hm;
            }
        } else {
            lo -= b * hp / (hm * s);
            mid += b * (hp - hm) / (hm * hp);
            hi += b * hm / (hp * s);
        }
        sub[i] = lo;
        diag[i] = mid - c;
        if i + 1 < unknowns {
            sup[i] = hi;
        } else {
            rhs[i] = -hi * problem.gamma;
        }
    }

    let mut values = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    values.push(problem.gamma);
    Ok(SolutionGrid::assemble(problem, grid.clone(), values, Method::FiniteDifference))
}

/// Gaussian elimination with partial pivoting for a tridiagonal system;
/// `sub[0]` and `sup[n-1]` are ignored.
pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n];
    let mut dl = sub.to_vec();
    let mut b = rhs.to_vec();
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = scale * f64::EPSILON * n as f64;

    for i in 0..n - 1 {
        let l = dl[i + 1];
        if d[i].abs() >= l.abs() {
            if d[i].abs() <= tiny {
                return Err(singular(i));
            }
            let f = l / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i + 1] = 0.0;
        } else {
            // swap rows i and i+1
            let f = d[i] / l;
            d[i] = l;
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1].abs() <= tiny {
        return Err(singular(n - 1));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Discretization("non-finite solution of the linear system".into()));
    }
    Ok(x)
}

fn singular(row: usize) -> Error {
    Error::Discretization(format!("tridiagonal system is singular at row {row}"))
}
