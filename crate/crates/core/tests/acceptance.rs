//! Acceptance criteria. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use driftlab::experiments::{dichotomy_scan, gamma_family, Classification};
use driftlab::fields::{check_hypothesis, Hypothesis, HypothesisGrid, PotentialC, RadialDrift};
use driftlab::geometry::{classify_volume_growth, growth_radii, GrowthClass, ModelManifold, WarpingFunction};
use driftlab::presets;
use driftlab::quadrature::Quadrature;
use driftlab::solver::{
    shoot_oracle, solve_bvp, solve_bvp_with, verify_supersolution, BVPProblem, RadialGrid, Supersolution,
};
use driftlab::weights::{admissible_params, Theorem};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sinh_problem(gamma: f64) -> BVPProblem {
    BVPProblem::new(
        ModelManifold::euclidean(3).unwrap(),
        RadialDrift::zero(),
        PotentialC::constant(1.0).unwrap(),
        gamma,
        5.0,
    )
    .unwrap()
}

fn sinh_exact(r: f64) -> f64 {
    let a = 5.0 / 5f64.sinh();
    if r == 0.0 {
        a
    } else {
        a * r.sinh() / r
    }
}

fn max_rel_error(nodes: usize) -> f64 {
    let grid = RadialGrid::uniform(5.0, nodes).unwrap();
    let u = solve_bvp(&sinh_problem(1.0), &grid).unwrap();
    grid.nodes()
        .iter()
        .zip(u.values())
        .map(|(&r, &v)| ((v - sinh_exact(r)) / sinh_exact(r)).abs())
        .fold(0.0, f64::max)
}

fn analytic_oracle() -> Verdict {
    let t = Instant::now();
    let err = max_rel_error(4096);
    let elapsed = t.elapsed();
    verdict(
        err <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("max relative error {err:.3e} (tol 1e-6), {elapsed:?} (limit 1 s)"),
    )
}

fn cross_solver() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for name in presets::PRIMARY {
        let (_, s) = presets::scenario(name).unwrap().unwrap();
        let problem = s.problem(1.0, s.solver.r_max).unwrap();
        let grid = s.solver.grid(s.solver.r_max).unwrap();
        let fd = solve_bvp_with(&problem, &grid, s.solver.options()).unwrap();
        let shot = shoot_oracle(&problem, &grid).unwrap();
        let d = fd.sup_distance(&shot).unwrap();
        worst = worst.max(d);
        parts.push(format!("{name} {d:.1e}"));
    }
    let elapsed = t.elapsed();
    verdict(
        worst <= 1e-5 && elapsed < Duration::from_secs(10),
        format!("worst sup distance {worst:.2e} (tol 1e-5), {elapsed:?} (limit 10 s) [{}]", parts.join(", ")),
    )
}

fn uniqueness_decay() -> Verdict {
    let (_, s) = presets::scenario("scenario-u").unwrap().unwrap();
    let report = dichotomy_scan(&s).unwrap();
    let mut ok = report.classification == Classification::Decay;
    let mut parts = Vec::new();
    for (row, quoted) in report.probes.iter().zip([7.92e-2, 1.07e-3, 9.7e-8]) {
        let r = row.r_max;
        let exact = r * 1f64.sinh() / r.sinh();
        let v = row.u_at_rstar.unwrap_or(f64::NAN);
        let rel = ((v - exact) / exact).abs();
        let rel_quoted = ((v - quoted) / quoted).abs();
        ok &= rel <= 0.01 && rel_quoted <= 0.01;
        parts.push(format!("R={r}: {v:.4e} (exact {exact:.4e}, rel {rel:.1e})"));
    }
    verdict(
        ok,
        format!("classification {}; {}", report.classification.label(), parts.join("; ")),
    )
}

fn multiplicity() -> Verdict {
    let (_, s) = presets::scenario("scenario-nu").unwrap().unwrap();
    let report = dichotomy_scan(&s).unwrap();
    let probe = |r: f64| {
        report
            .probes
            .iter()
            .find(|p| p.r_max == r)
            .and_then(|p| p.u_at_rstar)
            .unwrap_or(f64::NAN)
    };
    let (u40, u80) = (probe(40.0), probe(80.0));
    let diff = (u80 - u40).abs();
    let limit = report.limit_estimate.unwrap_or(u80);
    let probes_ok = diff <= 1e-3 && limit.abs() >= 0.1;

    let family = gamma_family(&s, 80.0).unwrap();
    let separation_ok = family
        .distances
        .iter()
        .all(|d| d.sup_distance >= d.gamma_gap * (1.0 - 1e-12));
    let max_res = family.members.iter().map(|m| m.residual).fold(0.0, f64::max);
    let family_ok = family.members.len() == 4 && separation_ok && max_res <= 1e-4;
    verdict(
        probes_ok && family_ok,
        format!(
            "|u80(1) - u40(1)| = {diff:.3e} (tol 1e-3), limit {limit:.4} (need >= 0.1), classification {}; family: {} members, separation {}, max residual {max_res:.2e} (tol 1e-4)",
            report.classification.label(),
            family.members.len(),
            if separation_ok { "ok" } else { "violated" }
        ),
    )
}

fn supersolutions() -> Verdict {
    let e3 = ModelManifold::euclidean(3).unwrap();
    let c0 = 3.0;
    let w = verify_supersolution(
        &e3,
        &RadialDrift::zero(),
        &PotentialC::constant(c0).unwrap(),
        &Supersolution::Constant(1.0 / c0),
        0.5,
        100.0,
        -1.0,
    )
    .unwrap();
    let nu_drift = RadialDrift::power_affine(2.0, 2.0, 0.0).unwrap();
    let unit = PotentialC::constant(1.0).unwrap();
    let half = verify_supersolution(
        &e3,
        &nu_drift,
        &unit,
        &Supersolution::InversePower { c: 1.0, beta: 0.5 },
        2.0,
        100.0,
        -1.0,
    )
    .unwrap();
    // σ = 2, so β = σ + 1 = 3
    let steep = verify_supersolution(
        &e3,
        &nu_drift,
        &unit,
        &Supersolution::InversePower { c: 1.0, beta: 3.0 },
        2.0,
        100.0,
        -1.0,
    )
    .unwrap();
    let ok = w.pass
        && w.margin.abs() <= 1e-12
        && half.pass
        && half.margin >= 0.4
        && !steep.pass
        && steep.witness_r >= 2.0
        && steep.margin < 0.0;
    verdict(
        ok,
        format!(
            "W=1/c0 margin {:.1e}; r^-1/2 margin {:.4}; beta=3 pass={} margin {:.3e} witness r={:.3}",
            w.margin, half.margin, steep.pass, steep.margin, steep.witness_r
        ),
    )
}

fn hypothesis_exactness() -> Verdict {
    let grid = HypothesisGrid::default();
    let m = ModelManifold::euclidean(3).unwrap();
    let c = PotentialC::constant(1.0).unwrap();
    let mut profiles = Vec::new();
    for s in [0.5, 1.0, 1.5, 2.0, 3.0] {
        for a in [0.5, 2.0, 10.0] {
            profiles.push((a, s, 0.0));
        }
        profiles.push((2.0, s, 1.0));
    }
    let mut mismatches = Vec::new();
    let mut weak = Vec::new();
    for &(a, s, o) in &profiles {
        let b = RadialDrift::power_affine(a, s, o).unwrap();
        let exact = |r: f64| a * (o + r).powf(s) * r / (1.0 + r);
        for (h, expected) in [(Hypothesis::H2, s <= 1.0), (Hypothesis::S22, s > 1.0)] {
            let rep = check_hypothesis(&m, &b, &c, h, &grid).unwrap();
            if rep.pass != expected {
                mismatches.push(format!("{}(A={a}, s={s}, o={o})", h.label()));
            }
            if !rep.pass {
                let good = rep.witnesses.first().is_some_and(|w| {
                    let value_ok = !w.inequality.contains("b,")
                        || (w.lhs - exact(w.r)).abs() <= 1e-12 * exact(w.r).abs().max(1.0);
                    w.violation() >= 0.01 && value_ok
                });
                if !good {
                    weak.push(format!("{}(A={a}, s={s}, o={o})", h.label()));
                }
            }
        }
    }
    verdict(
        profiles.len() == 20 && mismatches.is_empty() && weak.is_empty(),
        format!(
            "{} profiles; verdict mismatches {:?}; failures without a >=1% witness {:?}",
            profiles.len(),
            mismatches,
            weak
        ),
    )
}

fn admissibility() -> Verdict {
    // hand arithmetic: δ = p/(2(p-1)) = 1 at p = 2
    // T22: p c0 > β²δ + βK = 2.25 + 1.5 = 3.75, so c0 > 1.875
    // T24: p c0 > (τδ/2)(τ+2) + K(τ+1) = 17.5 + 12 = 29.5, so c0 > 14.75
    let delta = 2.0 / (2.0 * (2.0 - 1.0));
    let t22_hand = (1.5 * 1.5 * delta + 1.5 * 1.0) / 2.0;
    let t24_hand = (5.0 * delta / 2.0 * (5.0 + 2.0) + 2.0 * (5.0 + 1.0)) / 2.0;
    let t22 = admissible_params(Theorem::T22, 1.0, 1.0, 3, 2.0, 2.0, 1.5).unwrap();
    let t24 = admissible_params(Theorem::T24, 1.0, 2.0, 3, 2.0, 15.0, 5.0).unwrap();
    let ok = t22.min_c0 == 1.875
        && t22_hand == 1.875
        && t24.min_c0 == 14.75
        && t24_hand == 14.75
        && t22.delta_min == 1.0;
    verdict(
        ok,
        format!(
            "T22 threshold c0 > {} (hand {t22_hand}); T24 threshold c0 > {} (hand {t24_hand})",
            t22.min_c0, t24.min_c0
        ),
    )
}

fn geometry() -> Verdict {
    let q = Quadrature::default();
    let v2 = ModelManifold::euclidean(2).unwrap().volume(1.0, &q).unwrap();
    let v3 = ModelManifold::euclidean(3).unwrap().volume(1.0, &q).unwrap();
    let e2 = (v2 - PI).abs() / PI;
    let e3 = (v3 - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0);
    let p = ModelManifold::new(3, WarpingFunction::power_law(2.0).unwrap()).unwrap();
    let class = classify_volume_growth(&p, &growth_radii(1e4, 32)).unwrap().class;
    let alpha_ok = matches!(class, GrowthClass::Polynomial { alpha } if (alpha - 5.0).abs() <= 0.25);
    verdict(
        e2 <= 1e-8 && e3 <= 1e-8 && alpha_ok,
        format!("V_2(1) rel err {e2:.1e}, V_3(1) rel err {e3:.1e}, power-law(2) N=3 growth {class:?}"),
    )
}

fn hygiene() -> Verdict {
    let sizes = [1024, 2048, 4096];
    let errs: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let grid = RadialGrid::uniform(5.0, n).unwrap();
            let u = solve_bvp(&sinh_problem(1.0), &grid).unwrap();
            grid.nodes()
                .iter()
                .zip(u.values())
                .map(|(&r, &v)| (v - sinh_exact(r)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let h: Vec<f64> = sizes.iter().map(|&n| 5.0 / (n - 1) as f64).collect();
    let orders: Vec<f64> = (0..2)
        .map(|i| (errs[i] / errs[i + 1]).ln() / (h[i] / h[i + 1]).ln())
        .collect();
    let order_ok = orders.iter().all(|o| (1.8..=2.2).contains(o));

    let grid = RadialGrid::uniform(5.0, 4096).unwrap();
    let u1 = solve_bvp(&sinh_problem(1.0), &grid).unwrap();
    let u2 = solve_bvp(&sinh_problem(2.0), &grid).unwrap();
    let lin = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(a, b)| (b - 2.0 * a).abs())
        .fold(0.0, f64::max);

    let mut violations = Vec::new();
    for (name, _) in presets::SCENARIOS {
        let (_, s) = presets::scenario(name).unwrap().unwrap();
        let mut gammas: Vec<f64> = s.gammas.iter().copied().filter(|g| *g > 0.0).collect();
        gammas.push(1.0);
        for g in gammas {
            let u = s.solve(g, s.solver.r_max).unwrap();
            if u.values().iter().any(|&v| v < 0.0 || v > g) {
                violations.push(format!("{name} gamma={g}"));
            }
        }
    }
    verdict(
        order_ok && lin <= 1e-12 && violations.is_empty(),
        format!(
            "orders {:.3}, {:.3}; linearity defect {lin:.1e}; max-principle violations {:?}",
            orders[0], orders[1], violations
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("analytic-solution oracle", analytic_oracle),
        ("cross-solver agreement", cross_solver),
        ("uniqueness-regime decay", uniqueness_decay),
        ("multiplicity regime", multiplicity),
        ("supersolution verifiers", supersolutions),
        ("hypothesis checker exactness", hypothesis_exactness),
        ("admissibility arithmetic", admissibility),
        ("geometry", geometry),
        ("numerical hygiene", hygiene),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
