//! Minimal self-contained SVG rendering for line charts and heatmaps.

use std::fmt::Write as _;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const DASHES: [&str; 3] = ["", "6,3", "2,2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Series<'a> {
    pub label: &'a str,
    /// (x, y) with y in [0, 1].
    pub points: Vec<(f64, f64)>,
}

/// Accuracy-style line chart: x axis in dB, y axis fixed to [0, 1].
pub fn line_chart(title: &str, x_label: &str, series: &[Series<'_>]) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (60.0, 170.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - y) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    for i in 0..=10 {
        let y = i as f64 / 10.0;
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.1}</text>"##,
            left + pw,
            left - 6.0,
            sy(y) + 4.0,
            yy = sy(y)
        );
    }
    let mut ticks: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    let stride = ticks.len().div_ceil(12).max(1);
    for x in ticks.iter().step_by(stride) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#,
            sx(*x),
            top + ph + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">accuracy</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash_attr} points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = top + 10.0 + 16.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Count heatmap with every cell annotated by its count. Shading is by row
/// fraction.
pub fn heatmap(title: &str, labels: &[String], counts: &[u64]) -> String {
    let n = labels.len();
    let cell = if n > 12 { 30.0 } else { 48.0 };
    let margin = 90.0;
    let size = margin + cell * n as f64 + 20.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}" font-family="sans-serif" font-size="10">"#,
        size + 20.0,
        size + 20.0
    );
    let _ = writeln!(out, r#"<rect width="{size}" height="{}" fill="white"/>"#, size + 20.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        size / 2.0,
        escape(title)
    );
    let top = margin + 20.0;
    for (i, label) in labels.iter().enumerate() {
        let c = margin + cell * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            margin - 4.0,
            top + cell * (i as f64 + 0.5) + 3.0,
            escape(label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{c:.2}" y="{:.2}" text-anchor="start" transform="rotate(-60 {c:.2} {:.2})">{}</text>"#,
            top - 4.0,
            top - 4.0,
            escape(label)
        );
    }
    for r in 0..n {
        let row = &counts[r * n..(r + 1) * n];
        let total: u64 = row.iter().sum();
        for (c, &v) in row.iter().enumerate() {
            let frac = if total == 0 { 0.0 } else { v as f64 / total as f64 };
            let shade = (255.0 * (1.0 - 0.85 * frac)).round() as u8;
            let (x, y) = (margin + cell * c as f64, top + cell * r as f64);
            let text = if frac > 0.55 { "white" } else { "black" };
            let _ = writeln!(
                out,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{cell}" height="{cell}" fill="#{shade:02x}{shade:02x}ff" stroke="#cccccc"/><text class="count" x="{:.2}" y="{:.2}" text-anchor="middle" fill="{text}">{v}</text>"##,
                x + cell / 2.0,
                y + cell / 2.0 + 3.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
