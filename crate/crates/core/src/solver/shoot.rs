use super::{BVPProblem, Method, RadialGrid, SolutionGrid};
use crate::error::{Error, Result};

/// Values above this are rescaled during integration.
const RESCALE_THRESHOLD: f64 = 1e100;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Start radius of the integration; the regular series is used below it.
    pub eps0: f64,
    pub rtol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { eps0: 1e-4, rtol: 1e-11 }
    }
}

/// Independent shooting solution on the nodes of `grid`: integrates the
/// regular solution with unit amplitude outward with an adaptive
/// Dormand-Prince 5(4) pair and scales it to hit `u(R) = γ`.
pub fn shoot_oracle(problem: &BVPProblem, grid: &RadialGrid) -> Result<SolutionGrid> {
    shoot_oracle_with(problem, grid, ShootOptions::default())
}

pub fn shoot_oracle_with(problem: &BVPProblem, grid: &RadialGrid, options: ShootOptions) -> Result<SolutionGrid> {
    if (grid.r_max() - problem.r_max).abs() > 1e-12 * problem.r_max {
        return Err(Error::input(format!(
            "grid ends at {} but the problem is truncated at {}",
            grid.r_max(),
            problem.r_max
        )));
    }
    let unit = integrate_regular(problem, grid.nodes(), options)?;
    let end = *unit.last().unwrap();
    if end == 0.0 || !end.is_finite() {
        return Err(Error::Overflow { r: grid.r_max() });
    }
    // the solution map is linear in the amplitude, so one shot fixes it
    let amplitude = problem.gamma / end;
    let values = unit.iter().map(|v| amplitude * v).collect();
    Ok(SolutionGrid::assemble(problem, grid.clone(), values, Method::Shooting))
}

fn integrate_regular(problem: &BVPProblem, nodes: &[f64], options: ShootOptions) -> Result<Vec<f64>> {
    let dim = problem.manifold.dim() as f64;
    let c0 = problem.potential.value(0.0);
    let eps = options.eps0;
    let series = |r: f64| 1.0 + c0 * r * r / (2.0 * dim);

    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], -problem.advection(r) * y[1] + problem.potential.value(r) * y[0]]
    };

    let mut values = Vec::with_capacity(nodes.len());
    let mut idx = 0;
    while idx < nodes.len() && nodes[idx] <= eps {
        values.push(series(nodes[idx]));
        idx += 1;
    }
    let mut r = eps;
    let mut y = [series(eps), c0 * eps / dim];
    let mut h = eps;
    let mut steps = 0usize;

    for &target in &nodes[idx..] {
        while r < target {
            let last = target - r <= h * (1.0 + 1e-12);
            let step = if last { target - r } else { h };
            let (y_new, err) = dopri_step(&rhs, r, y, step, options.rtol);
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Discretization(format!("shooting exceeded {MAX_STEPS} steps at r = {r}")));
            }
            if !y_new.iter().all(|v| v.is_finite()) {
                return Err(Error::Overflow { r });
            }
            if err <= 1.0 {
                r = if last { target } else { r + step };
                y = y_new;
                if y[0].abs() > RESCALE_THRESHOLD || y[1].abs() > RESCALE_THRESHOLD {
                    y = [y[0] / RESCALE_THRESHOLD, y[1] / RESCALE_THRESHOLD];
                    values.iter_mut().for_each(|v| *v /= RESCALE_THRESHOLD);
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // keep the step size that was in use before the clipped step
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
        }
        values.push(y[0]);
    }
    Ok(values)
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step; returns the fifth-order update and the scaled
/// error norm (accept when `<= 1`).
fn dopri_step<F: Fn(f64, [f64; 2]) -> [f64; 2]>(f: &F, r: f64, y: [f64; 2], h: f64, rtol: f64) -> ([f64; 2], f64) {
    let comb = |ks: &[([f64; 2], f64)]| -> [f64; 2] {
        let mut out = y;
        for (k, a) in ks {
            out[0] += h * a * k[0];
            out[1] += h * a * k[1];
        }
        out
    };
    let k1 = f(r, y);
    let k2 = f(r + C2 * h, comb(&[(k1, A21)]));
    let k3 = f(r + C3 * h, comb(&[(k1, A31), (k2, A32)]));
    let k4 = f(r + C4 * h, comb(&[(k1, A41), (k2, A42), (k3, A43)]));
    let k5 = f(r + C5 * h, comb(&[(k1, A51), (k2, A52), (k3, A53), (k4, A54)]));
    let k6 = f(r + h, comb(&[(k1, A61), (k2, A62), (k3, A63), (k4, A64), (k5, A65)]));
    let y_new = comb(&[(k1, B1), (k3, B3), (k4, B4), (k5, B5), (k6, B6)]);
    let k7 = f(r + h, y_new);
    let atol = rtol * 1e-6 * (y[0].abs() + y[1].abs());
    let mut err: f64 = 0.0;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err = err.max(if sc > 0.0 { e.abs() / sc } else { 0.0 });
    }
    (y_new, err)
}
