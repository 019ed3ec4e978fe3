//! Minimal SVG renderings: line charts and grouped bar charts.

use std::fmt::Write as _;

use crate::diagnostics::{CalibrationTable, EntropyHistograms};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            dashed: false,
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn open(svg: &mut String, frame: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            frame.px(xv),
            y0 + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(svg: &mut String, names: &[&str]) {
    for (k, name) in names.iter().enumerate() {
        let y = MARGIN + 4.0 + 16.0 * k as f64;
        let x = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 9.0,
            PALETTE[k % PALETTE.len()],
            x + 14.0,
            y,
            escape(name)
        );
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

/// Line chart; `x`/`y` ranges default to the data extent.
pub fn line_chart(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    x: Option<(f64, f64)>,
    y: Option<(f64, f64)>,
) -> String {
    let frame = Frame {
        x: x.unwrap_or_else(|| range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))),
        y: y.unwrap_or_else(|| {
            let (lo, hi) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
            (lo.min(0.0), hi)
        }),
    };
    let mut svg = String::new();
    open(&mut svg, &frame, title, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let d: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(a, b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
            .collect();
        if d.is_empty() {
            continue;
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="5,4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            d.join(" "),
            PALETTE[k % PALETTE.len()]
        );
    }
    legend(
        &mut svg,
        &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
    );
    svg.push_str("</svg>\n");
    svg
}

/// Grouped bars over equal-width bins of `[lo, hi]`.
pub fn bar_chart(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    span: (f64, f64),
    groups: &[(&str, Vec<f64>)],
) -> String {
    let bins = groups.first().map(|g| g.1.len()).unwrap_or(0).max(1);
    let top = groups
        .iter()
        .flat_map(|g| g.1.iter().copied())
        .fold(0.0, f64::max)
        .max(1.0);
    let frame = Frame {
        x: span,
        y: (0.0, top),
    };
    let mut svg = String::new();
    open(&mut svg, &frame, title, xlabel, ylabel);
    let bin_w = (span.1 - span.0) / bins as f64;
    let slot = bin_w / groups.len().max(1) as f64;
    for (k, (_, values)) in groups.iter().enumerate() {
        for (b, &v) in values.iter().enumerate() {
            let x0 = span.0 + b as f64 * bin_w + k as f64 * slot;
            let (left, right) = (frame.px(x0), frame.px(x0 + slot));
            let (ytop, ybase) = (frame.py(v), frame.py(0.0));
            let _ = writeln!(
                svg,
                r#"<rect x="{left:.2}" y="{ytop:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                (right - left).max(0.5),
                ybase - ytop,
                PALETTE[k % PALETTE.len()]
            );
        }
    }
    legend(&mut svg, &groups.iter().map(|g| g.0).collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    svg
}

/// Observed positive fraction against mean predicted probability per bin.
pub fn calibration_svg(table: &CalibrationTable) -> String {
    let points = table
        .bins
        .iter()
        .filter_map(|b| Some((b.mean_predicted?, b.observed_fraction?)))
        .collect();
    let mut diagonal = Series::new("perfect calibration", vec![(0.0, 0.0), (1.0, 1.0)]);
    diagonal.dashed = true;
    line_chart(
        "Calibration",
        "mean predicted probability",
        "observed positive fraction",
        &[Series::new("model", points), diagonal],
        Some((0.0, 1.0)),
        Some((0.0, 1.0)),
    )
}

pub fn entropy_svg(h: &EntropyHistograms) -> String {
    let f = |v: &[usize]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
    bar_chart(
        "Entropy of predictive distributions",
        "entropy (bits)",
        "cases",
        (0.0, 1.0),
        &[
            ("all", f(&h.all)),
            ("correct", f(&h.correct)),
            ("incorrect", f(&h.incorrect)),
        ],
    )
}

/// Density curves on [0, 1].
pub fn density_svg(title: &str, series: &[Series]) -> String {
    line_chart(
        title,
        "probability",
        "density",
        series,
        Some((0.0, 1.0)),
        None,
    )
}
