//! Minimal SVG plots: a space-time density raster with trajectory overlays,
//! and plain line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 9] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#1f78b4",
    "#b2182b",
];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
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

    /// Larger `y` is drawn higher up.
    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for (v, anchor_x) in [(self.x.0, l), (self.x.1, r)] {
            let _ = writeln!(
                out,
                r#"<text x="{anchor_x}" y="{}" font-size="11" text-anchor="middle">{v:.3}</text>"#,
                b + 14.0
            );
        }
        for (v, anchor_y) in [(self.y.0, b), (self.y.1, t)] {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{v:.3}</text>"#,
                l - 4.0,
                anchor_y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{x_label}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    );
    s
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str) {
    let pts: Vec<String> = points
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        pts.join(" ")
    );
}

/// Space-time plot with position horizontal and time running from bottom to
/// top. Each density row becomes a band filled by a horizontal linear
/// gradient; `tracks` are `(t, x)` polylines.
pub fn spacetime(
    title: &str,
    xs: &[f64],
    times: &[f64],
    density: &[Vec<f64>],
    tracks: &[Vec<(f64, f64)>],
) -> String {
    let frame = Frame {
        x: bounds(xs.iter().copied()),
        y: bounds(times.iter().copied()),
    };
    let mut out = header(title);
    let peak = density.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let _ = writeln!(out, "<defs>");
    for (k, row) in density.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<linearGradient id="row{k}" x1="0" x2="1" y1="0" y2="0">"#
        );
        let n = row.len().max(2) - 1;
        for (i, v) in row.iter().enumerate() {
            let opacity = if peak > 0.0 { v / peak } else { 0.0 };
            let _ = writeln!(
                out,
                r##"<stop offset="{:.4}" stop-color="#08306b" stop-opacity="{opacity:.4}"/>"##,
                i as f64 / n as f64
            );
        }
        let _ = writeln!(out, "</linearGradient>");
    }
    let _ = writeln!(out, "</defs>");
    for (k, &t) in times.iter().enumerate() {
        let lo = if k == 0 { t } else { 0.5 * (times[k - 1] + t) };
        let hi = if k + 1 == times.len() {
            t
        } else {
            0.5 * (t + times[k + 1])
        };
        let (top, bottom) = (frame.py(hi), frame.py(lo));
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{top:.2}" width="{}" height="{:.2}" fill="url(#row{k})"/>"#,
            WIDTH - 2.0 * MARGIN,
            (bottom - top).max(0.5)
        );
    }
    for (i, track) in tracks.iter().enumerate() {
        let pts: Vec<(f64, f64)> = track.iter().map(|&(t, x)| (x, t)).collect();
        polyline(&mut out, &frame, &pts, COLORS[i % COLORS.len()]);
    }
    frame.axes(&mut out, "x", "t");
    out.push_str("</svg>\n");
    out
}

/// Line chart of named `(x, y)` series.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(&str, Vec<(f64, f64)>)],
) -> String {
    let frame = Frame {
        x: bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.0))),
        y: bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.1))),
    };
    let mut out = header(title);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        polyline(&mut out, &frame, pts, color);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{name}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (i + 1) as f64
        );
    }
    frame.axes(&mut out, x_label, y_label);
    out.push_str("</svg>\n");
    out
}
