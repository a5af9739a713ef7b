use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn driftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_preset(preset: &str, command: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--preset", preset, "--command", command, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    driftlab(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_reports_hypotheses_with_witnesses() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("scenario-nu", "check", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    let hyps = r["result"]["assessment"]["hypotheses"].as_array().unwrap();
    let find = |name: &str| hyps.iter().find(|h| h["hypothesis"]["name"] == name).unwrap();
    let h2 = find("h2");
    assert_eq!(h2["pass"], false);
    assert!(h2["witnesses"][0]["r"].as_f64().unwrap() > 0.0);
    let s22 = find("s22");
    assert_eq!(s22["pass"], true);
    assert!((s22["constants"]["sigma"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert!(r["result"]["assessment"]["admissibility"].is_object());
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_writes_solution_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("sinh-solve", "solve", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    let u1 = r["result"]["u_at_rstar"].as_f64().unwrap();
    let exact = 5.0 * 1f64.sinh() / 5f64.sinh();
    assert!((u1 - exact).abs() < 1e-6, "{u1}");
    assert!(r["result"]["oracle_distance"].as_f64().unwrap() <= 1e-5);

    let csv = fs::read_to_string(tmp.path().join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let near = rows
        .iter()
        .min_by(|a, b| (a.0 - 1.0).abs().total_cmp(&(b.0 - 1.0).abs()))
        .unwrap();
    let expected = exact * near.0.sinh() / near.0 / 1f64.sinh();
    assert!((near.1 - expected).abs() < 1e-6);
    assert_eq!(rows.last().unwrap().1, 1.0);
    assert!(tmp.path().join("plot_solution-profile.svg").exists());
}

#[test]
fn dichotomy_on_scenario_u_decays() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("scenario-u", "dichotomy", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["result"]["classification"]["kind"], "decay");
    let csv = fs::read_to_string(tmp.path().join("probes.csv")).unwrap();
    assert!(csv.starts_with("R,u_at_rstar\n5,"));
    assert_eq!(csv.lines().count(), 5);
    assert!(tmp.path().join("plot_probe-vs-R.svg").exists());
}

#[test]
fn dichotomy_failure_names_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("scenario-nu", "dichotomy", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("regime consistency"), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["pass"], false);
    assert!(!r["failures"].as_array().unwrap().is_empty());
}

#[test]
fn family_on_scenario_nu() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("scenario-nu", "family", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("family.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,u_gamma_-1,u_gamma_0,u_gamma_1,u_gamma_2"));
    // the γ = 0 member vanishes identically
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")));
    let svg = fs::read_to_string(tmp.path().join("plot_family-overlay.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn reproduce_corollary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("corollary-2.6", "reproduce", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["result"]["pass"], true);
    assert!(r["result"]["part_ii"]["family"]["distinct"].as_u64().unwrap() >= 3);
    for f in ["probes.csv", "family.csv", "plot_probe-vs-R.svg", "plot_family-overlay.svg", "metadata.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn reproduce_with_single_gamma_reports_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(driftlab::presets::text("corollary-2.6").unwrap()).unwrap();
    doc["part_ii"]["experiment"]["gammas"] = serde_json::json!([0.0]);
    let path = tmp.path().join("degenerate.json");
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = tmp.path().join("out");
    let o = driftlab(&[
        "--config",
        path.to_str().unwrap(),
        "--command",
        "reproduce",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("regime mismatch"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let text = driftlab::presets::text("scenario-u")
        .unwrap()
        .replace("\"upwind\": false", "\"upwind\": false,\n    \"smoothing\": 1");
    let path = tmp.path().join("bad.json");
    fs::write(&path, text).unwrap();
    let out = tmp.path().join("out");
    let o = driftlab(&["--config", path.to_str().unwrap(), "--command", "check", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("solver.smoothing") && err.contains("line"), "{err}");

    let o = run_preset("no-such-preset", "check", &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    // a scenario document is not a reproduction document
    let o = run_preset("scenario-u", "reproduce", &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = driftlab(&["--preset", "scenario-u", "--command", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    let o = driftlab(&["--config", missing.to_str().unwrap(), "--command", "check"]);
    assert_eq!(o.status.code(), Some(3));

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run_preset("scenario-u", "check", &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn strict_turns_inconclusive_into_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_preset("marginal-unknown", "dichotomy", &tmp.path().join("a"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&tmp.path().join("a"))["result"]["classification"]["kind"], "inconclusive");
    let o = run_preset("marginal-unknown", "dichotomy", &tmp.path().join("b"), &["--strict"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("strict"));
}

#[test]
fn nodes_override_changes_grid_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_preset("sinh-solve", "solve", &a, &[]);
    let o = run_preset("sinh-solve", "solve", &b, &["--nodes", "2048"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(rb["result"]["nodes"], 2048);
    assert_ne!(ra["config_hash"], rb["config_hash"]);
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for (preset, command, files) in [
        ("scenario-u", "dichotomy", &["report.json", "probes.csv", "plot_probe-vs-R.svg"][..]),
        ("scenario-nu", "family", &["report.json", "family.csv", "plot_family-overlay.svg"][..]),
        ("corollary-2.6", "reproduce", &["report.json", "probes.csv", "family.csv"][..]),
    ] {
        let (a, b) = (tmp.path().join(format!("{preset}-a")), tmp.path().join(format!("{preset}-b")));
        run_preset(preset, command, &a, &[]);
        run_preset(preset, command, &b, &[]);
        for f in files {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{preset} {f}");
        }
        assert!(a.join("metadata.json").exists());
    }
}
