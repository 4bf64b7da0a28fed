//! Bare-bones SVG charts: axes, polylines, markers, error bars, labels.

use std::fmt::Write;

use crate::report::{RecordComparison, WorkspaceReport};
use crate::workspace::Ellipse;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

enum Mark {
    Line { pts: Vec<(f64, f64)>, color: &'static str, closed: bool },
    Dots { pts: Vec<(f64, f64)>, color: &'static str },
    Bar { x: f64, lo: f64, hi: f64 },
}

/// A single-axes chart in data coordinates.
pub struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    marks: Vec<Mark>,
    legend: Vec<(&'static str, String)>,
    equal_aspect: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            marks: Vec::new(),
            legend: Vec::new(),
            equal_aspect: false,
        }
    }

    pub fn equal_aspect(mut self) -> Self {
        self.equal_aspect = true;
        self
    }

    pub fn polyline(&mut self, pts: Vec<(f64, f64)>, color: &'static str, label: &str) {
        self.legend.push((color, label.into()));
        self.marks.push(Mark::Line { pts, color, closed: false });
    }

    pub fn polygon(&mut self, pts: Vec<(f64, f64)>, color: &'static str, label: &str) {
        self.legend.push((color, label.into()));
        self.marks.push(Mark::Line { pts, color, closed: true });
    }

    pub fn dots(&mut self, pts: Vec<(f64, f64)>, color: &'static str, label: &str) {
        self.legend.push((color, label.into()));
        self.marks.push(Mark::Dots { pts, color });
    }

    pub fn error_bar(&mut self, x: f64, lo: f64, hi: f64) {
        self.marks.push(Mark::Bar { x, lo, hi });
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut add = |x: f64, y: f64| {
            if x.is_finite() && y.is_finite() {
                b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
            }
        };
        for m in &self.marks {
            match m {
                Mark::Line { pts, .. } | Mark::Dots { pts, .. } => pts.iter().for_each(|&(x, y)| add(x, y)),
                Mark::Bar { x, lo, hi } => {
                    add(*x, *lo);
                    add(*x, *hi);
                }
            }
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let span = if hi > lo { hi - lo } else { 1.0 };
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x0, x1) = pad(b.0, b.1);
        let (y0, y1) = pad(b.2, b.3);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = self.bounds();
        let pw = WIDTH - 2.0 * MARGIN;
        let ph = HEIGHT - 2.0 * MARGIN;
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            x0 = cx - scale * pw / 2.0;
            x1 = cx + scale * pw / 2.0;
            y0 = cy - scale * ph / 2.0;
            y1 = cy + scale * ph / 2.0;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                HEIGHT - MARGIN + 16.0,
                fmt_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 6.0,
                sy(yv) + 4.0,
                fmt_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for m in &self.marks {
            match m {
                Mark::Line { pts, color, closed } => {
                    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let tag = if *closed { "polygon" } else { "polyline" };
                    let _ = writeln!(
                        s,
                        r#"<{tag} points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        coords.join(" ")
                    );
                }
                Mark::Dots { pts, color } => {
                    for &(x, y) in pts {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
                Mark::Bar { x, lo, hi } => {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="gray"/>"#,
                        sx(*x),
                        sy(*lo),
                        sy(*hi)
                    );
                }
            }
        }
        for (k, (color, label)) in self.legend.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                WIDTH - MARGIN - 150.0,
                y - 9.0,
                WIDTH - MARGIN - 135.0,
                y,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

/// Lateral tip deflection against θ₁: measured points, predicted curve and
/// an error bar per record. The lateral coordinate is y where observed,
/// z otherwise.
pub fn validation_plot(records: &[RecordComparison]) -> String {
    let mut rows: Vec<&RecordComparison> = records.iter().collect();
    rows.sort_by(|a, b| a.theta1_deg.total_cmp(&b.theta1_deg));
    let lateral = |r: &RecordComparison| -> (usize, Option<f64>) {
        match r.measured_mm {
            [_, Some(y), _] => (1, Some(y)),
            [_, None, z] => (2, z),
        }
    };
    let mut chart = Chart::new("Tip deflection", "theta1 (deg)", "lateral tip position (mm)");
    let measured: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| lateral(r).1.map(|v| (r.theta1_deg, v)))
        .collect();
    let predicted: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta1_deg, r.predicted_mm[lateral(r).0])).collect();
    chart.polyline(predicted, "steelblue", "model");
    chart.dots(measured, "crimson", "measured");
    for r in &rows {
        let p = r.predicted_mm[lateral(r).0];
        chart.error_bar(r.theta1_deg, p - r.error_mm, p + r.error_mm);
    }
    chart.render()
}

/// y–z projection of workspace points with the fitted ellipse.
pub fn workspace_plot(report: &WorkspaceReport, ellipse: &Ellipse) -> String {
    let mut chart = Chart::new("Tip workspace (y-z)", "y (mm)", "z (mm)").equal_aspect();
    let curve = ellipse.sample(180).iter().map(|p| (p.x * 1e3, p.y * 1e3)).collect();
    chart.polygon(curve, "steelblue", "fitted ellipse");
    chart.dots(report.points_mm.iter().map(|p| (p[1], p[2])).collect(), "crimson", "tip");
    chart.render()
}
