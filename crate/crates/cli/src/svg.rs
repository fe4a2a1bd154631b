//! Minimal standalone SVG line plots and heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = l + f * (r - l);
        let py = b - f * (b - t);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, b + 16.0, x0 + f * (x1 - x0));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3e}</text>"#, l - 6.0, py + 4.0, y0 + f * (y1 - y0));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xs = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let ys = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (l, r, t, b) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let map = |(x, y): (f64, f64)| (l + (x - xs.0) / (xs.1 - xs.0) * (r - l), b - (y - ys.0) / (ys.1 - ys.0) * (b - t));

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xs, ys, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&p| {
                let (px, py) = map(p);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = t + 14.0 + 18.0 * k as f64;
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, r + 10.0, r + 30.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, r + 34.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn ramp(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let r = (255.0 * f) as u8;
    let g = (255.0 * (1.0 - (2.0 * f - 1.0).abs())) as u8;
    let b = (255.0 * (1.0 - f)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of `log10 |value|` over scattered `(x, y)` cells on a lattice.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, cells: &[(f64, f64, f64)]) -> String {
    let mut xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let logs: Vec<f64> = cells.iter().map(|c| c.2.abs().max(1e-300).log10()).collect();
    let zr = bounds(logs.iter().copied());
    let xr = bounds(xs.iter().copied());
    let yr = bounds(ys.iter().copied());
    let (l, r, t, b) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let cw = (r - l) / xs.len().max(1) as f64;
    let ch = (b - t) / ys.len().max(1) as f64;

    let mut out = String::new();
    header(&mut out, title);
    for (c, z) in cells.iter().zip(&logs) {
        let i = xs.partition_point(|&v| v < c.0);
        let j = ys.partition_point(|&v| v < c.1);
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            l + i as f64 * cw,
            b - (j + 1) as f64 * ch,
            cw + 0.3,
            ch + 0.3,
            ramp((z - zr.0) / (zr.1 - zr.0))
        );
    }
    axes(&mut out, xr, yr, xlabel, ylabel);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let y = b - f * (b - t) - 10.0;
        let _ = writeln!(out, r#"<rect x="{:.1}" y="{y:.1}" width="14" height="10" fill="{}"/>"#, r + 10.0, ramp(f));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">1e{:.1}</text>"#, r + 30.0, y + 9.0, zr.0 + f * (zr.1 - zr.0));
    }
    out.push_str("</svg>\n");
    out
}
