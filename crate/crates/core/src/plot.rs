//! Static SVG line plots on a fixed 800×600 canvas. Output depends only on
//! the input data.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::{DichotomyReport, FamilyReport};
use crate::solver::SolutionGrid;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    SolutionProfile,
    ProbeVsR,
    FamilyOverlay,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::SolutionProfile => "solution-profile",
            PlotKind::ProbeVsR => "probe-vs-R",
            PlotKind::FamilyOverlay => "family-overlay",
        }
    }

    pub fn file_name(&self) -> String {
        format!("plot_{}.svg", self.name())
    }

    fn axis_labels(&self) -> (&'static str, &'static str) {
        match self {
            PlotKind::SolutionProfile | PlotKind::FamilyOverlay => ("r", "u"),
            PlotKind::ProbeVsR => ("R", "u_R(r*)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn solution_series(u: &SolutionGrid, label: &str) -> Series {
    Series {
        label: label.to_string(),
        points: u.grid().nodes().iter().copied().zip(u.values().iter().copied()).collect(),
    }
}

pub fn probe_series(report: &DichotomyReport) -> Series {
    Series {
        label: format!("u_R({})", report.r_star),
        points: report
            .probes
            .iter()
            .filter_map(|p| p.u_at_rstar.map(|v| (p.r_max, v)))
            .collect(),
    }
}

pub fn family_series(report: &FamilyReport) -> Vec<Series> {
    report
        .solutions
        .iter()
        .zip(&report.members)
        .map(|(u, m)| solution_series(u, &format!("gamma = {}", m.gamma)))
        .collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            let pad = if log { 1.0 } else { 0.5 * hi.abs().max(1.0) };
            lo -= pad;
            hi += pad;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data coordinates.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let decades = (self.hi - self.lo).round() as i64;
            let stride = (decades as f64 / 8.0).ceil().max(1.0) as i64;
            return (0..=decades)
                .step_by(stride as usize)
                .map(|k| 10f64.powi((self.lo as i64 + k) as i32))
                .collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let start = (self.lo / step).ceil() as i64;
        let end = (self.hi / step).floor() as i64;
        (start..=end).map(|k| k as f64 * step).collect()
    }

    fn label(&self, v: f64) -> String {
        if self.log {
            format!("1e{}", v.log10().round() as i64)
        } else if v == 0.0 {
            "0".into()
        } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
            format!("{v:.1e}")
        } else {
            let s = format!("{v:.4}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    }
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().copied().step_by(stride).collect();
    if out.last() != points.last() {
        out.push(points[points.len() - 1]);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `series` as an SVG document. The y-axis is logarithmic for
/// [`PlotKind::ProbeVsR`] when every value is positive.
pub fn render(kind: PlotKind, series: &[Series]) -> Result<String> {
    let clean: Vec<Series> = series
        .iter()
        .map(|s| Series {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect(),
        })
        .filter(|s| !s.points.is_empty())
        .collect();
    if clean.is_empty() {
        return Err(Error::NoData(format!("{} has no finite points", kind.name())));
    }
    let all = || clean.iter().flat_map(|s| s.points.iter().copied());
    let log_y = kind == PlotKind::ProbeVsR && all().all(|(_, y)| y > 0.0);
    let xa = Axis::fit(all().map(|p| p.0), false);
    let ya = Axis::fit(all().map(|p| p.1), log_y);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + xa.unit(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.unit(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            xa.label(t)
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            ya.label(t)
        );
    }
    let (xl, yl) = kind.axis_labels();
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xl}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(yl)
    );
    for (i, series) in clean.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (k, (x, y)) in thin(&series.points).into_iter().enumerate() {
            if k > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", px(x), py(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#
        );
        if clean.len() > 1 {
            let ly = TOP + 15.0 + 16.0 * i as f64;
            let lx = LEFT + pw - 130.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 20.0,
                lx + 25.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
